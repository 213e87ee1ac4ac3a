#pragma once

#include "mcid/binary_model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mcid::positivity {

using binary::BinaryParams;

// One sampled cause vector projected onto v1 = 1/m and
// v2 = m^{-1/2} (1_{m/2}, -1_{m/2}).
struct ProjectionSample {
  int u = 0;
  double x1 = 0.0;
  double x2 = 0.0;
  int u_hat = 0;
};

// Midpoint (p_a0 + p_a1) / 2 used as the classifier threshold.
double decision_boundary(const BinaryParams& params);

// 1 if S(a)/m exceeds the threshold, else 0 (ties go to 0).
int u_hat(std::span<const std::uint8_t> a, const BinaryParams& params);

// Same classifier on the sufficient statistic.
int u_hat_from_count(int s, int m, const BinaryParams& params);

struct Misclassification {
  double rate = 0.0;             // P(U_hat != U)
  double p_hat1_given_u0 = 0.0;  // P(U_hat = 1 | U = 0)
  double p_hat0_given_u1 = 0.0;  // P(U_hat = 0 | U = 1)
  double standard_error = 0.0;   // binomial SE of rate
  int n = 0;
  int n_u0 = 0;
  int n_u1 = 0;
};

// Monte-Carlo estimate of the classifier's error at cause count m, using only
// pi_u, p_a0 and p_a1 from params.
Misclassification misclassification(const BinaryParams& params, int m, int n, std::uint64_t seed);

double misclassification_rate(const BinaryParams& params, int m, int n, std::uint64_t seed);

// exp(-2 m ((p_a1 - p_a0) / 2)^2)
double hoeffding_bound(const BinaryParams& params, int m);

// Samples n units at even m and returns their projections.
std::vector<ProjectionSample> projection_cloud(const BinaryParams& params, int m, int n,
                                               std::uint64_t seed);

// Fraction of samples whose u_hat disagrees with u.
double separation_statistic(std::span<const ProjectionSample> cloud);

}  // namespace mcid::positivity
