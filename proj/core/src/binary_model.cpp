#include "mcid/binary_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mcid::binary {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_probability(double p, const char* name) {
  if (!is_probability(p)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got "
                                + std::to_string(p));
  }
}

void require_count(const BinaryParams& params, int s) {
  if (s < 0 || s > params.m) {
    throw std::invalid_argument("S(a)=" + std::to_string(s) + " outside 0.." + std::to_string(params.m));
  }
}

// k * log(p) with the convention 0 * log(0) = 0.
double xlogp(int k, double p) {
  return k == 0 ? 0.0 : k * std::log(p);
}

// log P(A = a | U = u) for any a with S(a) = s.
double log_cause_likelihood(double p, int s, int m) {
  return xlogp(s, p) + xlogp(m - s, 1.0 - p);
}

}  // namespace

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void BinaryParams::validate() const {
  if (m < 1) {
    throw std::invalid_argument("BinaryParams: m must be >= 1");
  }
  require_probability(pi_u, "pi_u");
  require_probability(p_a0, "p_a0");
  require_probability(p_a1, "p_a1");
  if (p_a0 == p_a1) {
    throw std::invalid_argument("BinaryParams: p_a0 == p_a1 makes the causes uninformative about U");
  }
  if (p_y.size() != static_cast<std::size_t>(2 * (m + 1))) {
    throw std::invalid_argument("BinaryParams: p_y must have 2*(m+1) entries");
  }
  for (double p : p_y) {
    require_probability(p, "p_y entry");
  }
}

BinaryParams BinaryParams::with_logistic_outcome(int m, double pi_u, double p_a0, double p_a1,
                                                 double kappa, double eta) {
  BinaryParams params;
  params.m = m;
  params.pi_u = pi_u;
  params.p_a0 = p_a0;
  params.p_a1 = p_a1;
  params.p_y.resize(static_cast<std::size_t>(2 * (m + 1)));
  for (int u = 0; u <= 1; ++u) {
    for (int s = 0; s <= m; ++s) {
      params.outcome(u, s) = logistic(kappa * (s - 0.5 * m) + eta * u);
    }
  }
  params.validate();
  return params;
}

double intervention_prob(const BinaryParams& params, int s) {
  require_count(params, s);
  return (1.0 - params.pi_u) * params.outcome(0, s) + params.pi_u * params.outcome(1, s);
}

namespace {

// log P(U=1, a) - log P(U=0, a); infinite when one side is impossible.
double posterior_log_odds(const BinaryParams& params, int s) {
  require_count(params, s);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double log1 = params.pi_u > 0.0
                          ? std::log(params.pi_u) + log_cause_likelihood(params.p_a1, s, params.m)
                          : kNegInf;
  const double log0 = params.pi_u < 1.0
                          ? std::log1p(-params.pi_u) + log_cause_likelihood(params.p_a0, s, params.m)
                          : kNegInf;
  if (log1 == kNegInf && log0 == kNegInf) {
    throw std::domain_error("posterior_u: cause vector with S(a)=" + std::to_string(s)
                            + " has zero probability under both latent levels");
  }
  if (log0 == kNegInf) return std::numeric_limits<double>::infinity();
  if (log1 == kNegInf) return kNegInf;
  return log1 - log0;
}

}  // namespace

double posterior_u(const BinaryParams& params, int s) {
  const double d = posterior_log_odds(params, s);
  if (std::isinf(d)) return d > 0.0 ? 1.0 : 0.0;
  return logistic(d);
}

double observational_prob(const BinaryParams& params, int s) {
  const double post = posterior_u(params, s);
  return (1.0 - post) * params.outcome(0, s) + post * params.outcome(1, s);
}

FrechetBounds frechet_bounds(double pi_u_given_a, double pi_y_given_a) {
  require_probability(pi_u_given_a, "pi_u_given_a");
  require_probability(pi_y_given_a, "pi_y_given_a");
  FrechetBounds b;
  b.lo = std::max(0.0, pi_u_given_a + pi_y_given_a - 1.0);
  b.hi = std::min(pi_u_given_a, pi_y_given_a);
  return b;
}

JointTable table_from_p11(double pi_u_given_a, double pi_y_given_a, double p11) {
  const FrechetBounds b = frechet_bounds(pi_u_given_a, pi_y_given_a);
  if (p11 < b.lo) {
    throw std::domain_error("table_from_p11: p11=" + std::to_string(p11)
                            + " below the lower Frechet bound " + std::to_string(b.lo));
  }
  if (p11 > b.hi) {
    throw std::domain_error("table_from_p11: p11=" + std::to_string(p11)
                            + " above the upper Frechet bound " + std::to_string(b.hi));
  }
  JointTable t;
  t.pi_u_given_a = pi_u_given_a;
  t.pi_y_given_a = pi_y_given_a;
  t.p11 = p11;
  t.p10 = pi_u_given_a - p11;
  t.p01 = pi_y_given_a - p11;
  t.p00 = 1.0 - t.p10 - t.p01 - t.p11;
  // rounding can leave -1e-17 in a cell forced to zero
  t.p00 = std::max(t.p00, 0.0);
  t.p01 = std::max(t.p01, 0.0);
  t.p10 = std::max(t.p10, 0.0);
  return t;
}

JointTable model_table(const BinaryParams& params, int s) {
  const double post = posterior_u(params, s);
  JointTable t;
  t.pi_u_given_a = post;
  t.p11 = post * params.outcome(1, s);
  t.p10 = post * (1.0 - params.outcome(1, s));
  t.p01 = (1.0 - post) * params.outcome(0, s);
  t.p00 = (1.0 - post) * (1.0 - params.outcome(0, s));
  t.pi_y_given_a = t.p01 + t.p11;
  return t;
}

std::array<double, 4> copula_density(const JointTable& table) {
  const double pu = table.pi_u_given_a;
  const double py = table.pi_y_given_a;
  if (!(pu > 0.0 && pu < 1.0 && py > 0.0 && py < 1.0)) {
    throw std::domain_error("copula_density: margins must lie strictly inside (0, 1)");
  }
  return {table.p00 / ((1.0 - pu) * (1.0 - py)), table.p01 / ((1.0 - pu) * py),
          table.p10 / (pu * (1.0 - py)), table.p11 / (pu * py)};
}

double causal_from_table(double pi_u, const JointTable& table) {
  require_probability(pi_u, "pi_u");
  const double pu = table.pi_u_given_a;
  if (!(pu > 0.0 && pu < 1.0)) {
    throw std::domain_error(
        "causal_from_table: P(U=1 | A=a) is degenerate; use degenerate_ignorance");
  }
  return (1.0 - pi_u) * table.p01 / (1.0 - pu) + pi_u * table.p11 / pu;
}

IgnoranceInterval ignorance_region(const BinaryParams& params, int s) {
  const double d = posterior_log_odds(params, s);
  if (std::isinf(d)) {
    throw std::domain_error(
        "ignorance_region: P(U=1 | A=a) is degenerate; use degenerate_ignorance");
  }
  // Complements are taken directly so that a posterior near 0 or 1 does not
  // cancel. q = P(U=1|a), r = P(Y=1|a).
  const double q = logistic(d);
  const double qc = logistic(-d);
  const double y0 = params.outcome(0, s);
  const double y1 = params.outcome(1, s);
  const double r = qc * y0 + q * y1;
  const double rc = qc * (1.0 - y0) + q * (1.0 - y1);

  // The causal parameter is affine in p11, so its extremes sit at the Frechet
  // bounds. Each bound fixes P(Y=1|U=0,a) and P(Y=1|U=1,a).
  const auto causal = [&](double given_u0, double given_u1) {
    return (1.0 - params.pi_u) * given_u0 + params.pi_u * given_u1;
  };
  const double at_lo = rc <= q ? causal(1.0, 1.0 - rc / q) : causal(r / qc, 0.0);
  const double at_hi = rc <= qc ? causal(1.0 - rc / qc, 1.0) : causal(0.0, r / q);

  IgnoranceInterval region;
  region.lo = std::min(at_lo, at_hi);
  region.hi = std::max(at_lo, at_hi);
  region.point_true = intervention_prob(params, s);
  region.point_obs = r;
  return region;
}

IgnoranceInterval degenerate_ignorance(double pi_u, double pi_y_given_a, DegenerateSide side) {
  require_probability(pi_u, "pi_u");
  require_probability(pi_y_given_a, "pi_y_given_a");
  IgnoranceInterval region;
  region.point_obs = pi_y_given_a;
  if (side == DegenerateSide::kPosteriorToZero) {
    // P(Y=1 | U=1, a) is unconstrained in [0, 1]
    region.lo = (1.0 - pi_u) * pi_y_given_a;
    region.hi = region.lo + pi_u;
  } else {
    // P(Y=1 | U=0, a) is unconstrained in [0, 1]
    region.lo = pi_u * pi_y_given_a;
    region.hi = region.lo + (1.0 - pi_u);
  }
  // The true value is not recoverable from the degenerate limit alone.
  region.point_true = std::numeric_limits<double>::quiet_NaN();
  return region;
}

}  // namespace mcid::binary
