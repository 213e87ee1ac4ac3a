#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mcid::linear {

// Parameters of the linear-Gaussian multi-cause model
//
//   U := e_U,  A := alpha U + e_A,  Y := beta' A + gamma U + e_Y
//
// with independent centred Gaussian noise of variances sigma2_u, diag(sigma2_a)
// and sigma2_y.
struct StructuralParams {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  double gamma = 0.0;
  double sigma2_u = 1.0;
  Eigen::VectorXd sigma2_a;
  double sigma2_y = 1.0;

  Eigen::Index m() const { return alpha.size(); }

  // Throws std::invalid_argument on length mismatch or m == 0, and
  // std::domain_error on a non-positive variance.
  void validate() const;

  // Constant-vector parameters alpha = a*1, beta = b*1, sigma2_a = s2a*1.
  static StructuralParams constant(Eigen::Index m, double a, double b, double gamma,
                                   double sigma2_u, double s2a, double sigma2_y);
};

// Covariance blocks of the observable vector (A, Y).
struct ObservableCov {
  Eigen::MatrixXd sigma_aa;
  Eigen::VectorXd sigma_ay;
  double sigma_yy = 0.0;

  // The full (m+1)x(m+1) covariance of (A, Y).
  Eigen::MatrixXd assembled() const;

  // Largest entrywise |x - y| / max(|x|, |y|, floor) between two covariances.
  static double max_relative_difference(const ObservableCov& x, const ObservableCov& y,
                                        double floor = 1e-300);
};

// Rescaling of the latent confounder. Validity for a particular parameter vector
// is checked by valid_c_range / equivalent_params, not here.
class ScalingFactor {
 public:
  explicit ScalingFactor(double c);
  double value() const { return c_; }

 private:
  double c_;
};

// Sequence of problems indexed by m with alpha_m = a0/sqrt(m), beta_m = b0/sqrt(m),
// sigma2_a = s0_sq, so that |alpha_m|, |beta_m| and alpha_m' beta_m stay fixed.
struct AsymptoticFrame {
  double a0 = 1.0;
  double b0 = 1.0;
  double s0_sq = 1.0;
  double gamma = 1.0;
  double sigma2_u = 1.0;
  double sigma2_y = 1.0;

  void validate() const;
  StructuralParams at(Eigen::Index m) const;
};

ObservableCov observable_covariance(const StructuralParams& params);

// Sigma_AA^{-1} alpha by a dense SPD solve.
Eigen::VectorXd confounding_direction(const StructuralParams& params);

// beta_1(c) = beta + Sigma_AA^{-1} alpha * gamma sigma2_u (1 - 1/c). Defined for
// every c > 0, valid or not.
Eigen::VectorXd shifted_beta(const StructuralParams& params, ScalingFactor c);

// sigma2_{Y,1}(c), the outcome noise variance the rescaled model needs to
// reproduce Sigma_YY. c is valid iff this is positive.
double implied_outcome_variance(const StructuralParams& params, ScalingFactor c);

// The observationally equivalent parameter vector for scale c. Throws
// std::domain_error if sigma2_{Y,1}(c) <= 0.
StructuralParams equivalent_params(const StructuralParams& params, ScalingFactor c);

// Grid points with sigma2_{Y,1}(c) > 0, in grid order.
std::vector<ScalingFactor> valid_c_range(const StructuralParams& params,
                                         std::span<const double> grid);

// s(c) with beta_1(c) = s(c) beta, for constant alpha and nonzero constant beta.
double ignorance_multiplier(const StructuralParams& params, ScalingFactor c);

// Large-m limit of Delta_beta^(k)(c) / beta^(k); independent of m and k.
double asymptotic_shift_ratio(const AsymptoticFrame& frame, ScalingFactor c);

}  // namespace mcid::linear
