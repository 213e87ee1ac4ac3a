#include "mcid/linear_gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcid::linear {

namespace {

bool is_constant(const Eigen::VectorXd& v) {
  return v.size() > 0 && (v.array() == v(0)).all();
}

}  // namespace

void StructuralParams::validate() const {
  if (alpha.size() == 0) {
    throw std::invalid_argument("StructuralParams: need at least one cause (m >= 1)");
  }
  if (beta.size() != alpha.size() || sigma2_a.size() != alpha.size()) {
    throw std::invalid_argument("StructuralParams: alpha, beta and sigma2_a must share length m="
                                + std::to_string(alpha.size()));
  }
  if (!(sigma2_u > 0.0)) {
    throw std::domain_error("StructuralParams: sigma2_u must be positive");
  }
  if (!(sigma2_y > 0.0)) {
    throw std::domain_error("StructuralParams: sigma2_y must be positive");
  }
  if (!(sigma2_a.array() > 0.0).all()) {
    throw std::domain_error("StructuralParams: every sigma2_a entry must be positive");
  }
}

StructuralParams StructuralParams::constant(Eigen::Index m, double a, double b, double gamma,
                                            double sigma2_u, double s2a, double sigma2_y) {
  StructuralParams p;
  p.alpha = Eigen::VectorXd::Constant(m, a);
  p.beta = Eigen::VectorXd::Constant(m, b);
  p.gamma = gamma;
  p.sigma2_u = sigma2_u;
  p.sigma2_a = Eigen::VectorXd::Constant(m, s2a);
  p.sigma2_y = sigma2_y;
  p.validate();
  return p;
}

Eigen::MatrixXd ObservableCov::assembled() const {
  const Eigen::Index m = sigma_aa.rows();
  Eigen::MatrixXd full(m + 1, m + 1);
  full.topLeftCorner(m, m) = sigma_aa;
  full.topRightCorner(m, 1) = sigma_ay;
  full.bottomLeftCorner(1, m) = sigma_ay.transpose();
  full(m, m) = sigma_yy;
  return full;
}

double ObservableCov::max_relative_difference(const ObservableCov& x, const ObservableCov& y,
                                              double floor) {
  const Eigen::MatrixXd a = x.assembled();
  const Eigen::MatrixXd b = y.assembled();
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("ObservableCov: dimension mismatch");
  }
  const Eigen::ArrayXXd scale = a.array().abs().max(b.array().abs()).max(floor);
  return ((a - b).array().abs() / scale).maxCoeff();
}

ScalingFactor::ScalingFactor(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("ScalingFactor: c must be a finite positive number");
  }
}

void AsymptoticFrame::validate() const {
  if (!(s0_sq > 0.0) || !(sigma2_u > 0.0) || !(sigma2_y > 0.0)) {
    throw std::domain_error("AsymptoticFrame: s0_sq, sigma2_u and sigma2_y must be positive");
  }
}

StructuralParams AsymptoticFrame::at(Eigen::Index m) const {
  validate();
  if (m < 1) {
    throw std::invalid_argument("AsymptoticFrame: m must be >= 1");
  }
  const double root_m = std::sqrt(static_cast<double>(m));
  return StructuralParams::constant(m, a0 / root_m, b0 / root_m, gamma, sigma2_u, s0_sq,
                                    sigma2_y);
}

ObservableCov observable_covariance(const StructuralParams& params) {
  params.validate();
  const auto& alpha = params.alpha;
  const auto& beta = params.beta;

  ObservableCov cov;
  cov.sigma_aa = alpha * alpha.transpose() * params.sigma2_u;
  cov.sigma_aa.diagonal() += params.sigma2_a;
  cov.sigma_ay = cov.sigma_aa * beta + params.gamma * params.sigma2_u * alpha;
  const double total_loading = beta.dot(alpha) + params.gamma;
  cov.sigma_yy = total_loading * total_loading * params.sigma2_u
                 + beta.cwiseProduct(params.sigma2_a).dot(beta) + params.sigma2_y;
  return cov;
}

Eigen::VectorXd confounding_direction(const StructuralParams& params) {
  params.validate();
  Eigen::MatrixXd sigma_aa = params.alpha * params.alpha.transpose() * params.sigma2_u;
  sigma_aa.diagonal() += params.sigma2_a;
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma_aa);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("Sigma_AA is not numerically positive definite");
  }
  return llt.solve(params.alpha);
}

Eigen::VectorXd shifted_beta(const StructuralParams& params, ScalingFactor c) {
  const double shift = params.gamma * params.sigma2_u * (1.0 - 1.0 / c.value());
  return params.beta + confounding_direction(params) * shift;
}

namespace {

// sigma2_{Y,1} given the already-shifted beta.
double outcome_variance_for(const StructuralParams& params, const Eigen::VectorXd& beta1,
                            double c) {
  const double sigma_yy = observable_covariance(params).sigma_yy;
  const double loading = c * beta1.dot(params.alpha) + params.gamma;
  const double sigma2_u1 = params.sigma2_u / (c * c);
  return sigma_yy - loading * loading * sigma2_u1 - beta1.cwiseProduct(params.sigma2_a).dot(beta1);
}

}  // namespace

double implied_outcome_variance(const StructuralParams& params, ScalingFactor c) {
  return outcome_variance_for(params, shifted_beta(params, c), c.value());
}

StructuralParams equivalent_params(const StructuralParams& params, ScalingFactor c) {
  params.validate();
  if (c.value() == 1.0) {
    return params;
  }
  const Eigen::VectorXd beta1 = shifted_beta(params, c);
  const double sigma2_y1 = outcome_variance_for(params, beta1, c.value());
  if (!(sigma2_y1 > 0.0)) {
    throw std::domain_error("scaling factor c=" + std::to_string(c.value())
                            + " is invalid: implied sigma2_{Y,1}(c) = "
                            + std::to_string(sigma2_y1) + " is not positive");
  }
  StructuralParams out;
  out.alpha = params.alpha * c.value();
  out.beta = beta1;
  out.gamma = params.gamma;
  out.sigma2_u = params.sigma2_u / (c.value() * c.value());
  out.sigma2_a = params.sigma2_a;
  out.sigma2_y = sigma2_y1;
  return out;
}

std::vector<ScalingFactor> valid_c_range(const StructuralParams& params,
                                         std::span<const double> grid) {
  if (grid.empty()) {
    throw std::invalid_argument("valid_c_range: grid is empty");
  }
  params.validate();
  std::vector<ScalingFactor> valid;
  for (double c : grid) {
    if (!(c > 0.0)) {
      throw std::invalid_argument("valid_c_range: grid entries must be positive");
    }
    const ScalingFactor factor(c);
    if (c == 1.0 || implied_outcome_variance(params, factor) > 0.0) {
      valid.push_back(factor);
    }
  }
  return valid;
}

double ignorance_multiplier(const StructuralParams& params, ScalingFactor c) {
  params.validate();
  if (!is_constant(params.alpha) || !is_constant(params.beta)) {
    throw std::invalid_argument("ignorance_multiplier: alpha and beta must be constant vectors");
  }
  const double b = params.beta(0);
  if (b == 0.0) {
    throw std::invalid_argument("ignorance_multiplier: beta must be nonzero");
  }
  if (c.value() == 1.0) {
    return 1.0;
  }
  // Components of beta_1 agree up to rounding; average them.
  return shifted_beta(params, c).mean() / b;
}

double asymptotic_shift_ratio(const AsymptoticFrame& frame, ScalingFactor c) {
  frame.validate();
  if (frame.b0 == 0.0) {
    throw std::invalid_argument("asymptotic_shift_ratio: b0 must be nonzero");
  }
  const double direction = frame.a0 / (frame.b0 * (frame.s0_sq + frame.sigma2_u * frame.a0 * frame.a0));
  return direction * frame.gamma * frame.sigma2_u * (1.0 - 1.0 / c.value());
}

}  // namespace mcid::linear
