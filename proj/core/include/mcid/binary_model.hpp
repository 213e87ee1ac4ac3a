#pragma once

#include <array>
#include <vector>

namespace mcid::binary {

// All-binary multi-cause model:
//
//   U ~ Bern(pi_u),  A_k | U ~ iid Bern(p_A(U)),  Y | U, A ~ Bern(p_Y(U, S(A)))
//
// where S(A) is the number of active causes. The outcome table is stored
// row-major by u, i.e. p_y[u * (m + 1) + s].
struct BinaryParams {
  double pi_u = 0.3;
  double p_a0 = 0.1;
  double p_a1 = 0.9;
  int m = 6;
  std::vector<double> p_y;

  double outcome(int u, int s) const { return p_y[static_cast<std::size_t>(u * (m + 1) + s)]; }
  double& outcome(int u, int s) { return p_y[static_cast<std::size_t>(u * (m + 1) + s)]; }
  double p_a(int u) const { return u == 1 ? p_a1 : p_a0; }

  // Throws std::invalid_argument when a probability leaves [0, 1],
  // p_a0 == p_a1, m < 1, or p_y has the wrong size.
  void validate() const;

  // p_Y(u, s) = logistic(kappa * (s - m/2) + eta * u).
  static BinaryParams with_logistic_outcome(int m, double pi_u, double p_a0, double p_a1,
                                            double kappa, double eta);
};

double logistic(double x);

// Table of P(U = u, Y = y | A = a), cells named p_{uy}.
struct JointTable {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;
  double pi_u_given_a = 0.0;
  double pi_y_given_a = 0.0;
};

struct FrechetBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Closed set of values of P(Y = 1 | do(A = a)) compatible with the observed law.
struct IgnoranceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double point_true = 0.0;
  double point_obs = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return lo - tol <= x && x <= hi + tol; }
};

enum class DegenerateSide { kPosteriorToZero, kPosteriorToOne };

// P(Y = 1 | do(A = a)) for any a with S(a) = s.
double intervention_prob(const BinaryParams& params, int s);

// P(U = 1 | A = a), computed in log space. Throws std::domain_error if no
// latent level can generate a.
double posterior_u(const BinaryParams& params, int s);

// P(Y = 1 | A = a).
double observational_prob(const BinaryParams& params, int s);

FrechetBounds frechet_bounds(double pi_u_given_a, double pi_y_given_a);

// Completes the table from its margins and the free cell p11.
JointTable table_from_p11(double pi_u_given_a, double pi_y_given_a, double p11);

// The table implied by the model at S(a) = s.
JointTable model_table(const BinaryParams& params, int s);

// c(y, u | a) per cell, ordered (00, 01, 10, 11).
std::array<double, 4> copula_density(const JointTable& table);

double causal_from_table(double pi_u, const JointTable& table);

IgnoranceInterval ignorance_region(const BinaryParams& params, int s);

// Limiting region when P(U | A = a) collapses onto one level.
IgnoranceInterval degenerate_ignorance(double pi_u, double pi_y_given_a, DegenerateSide side);

}  // namespace mcid::binary
