#include "mcid/positivity.hpp"

#include "mcid/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcid::positivity {

namespace {

void check_latent(const BinaryParams& params) {
  for (double p : {params.pi_u, params.p_a0, params.p_a1}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("positivity: probabilities must lie in [0, 1]");
    }
  }
  if (params.p_a0 == params.p_a1) {
    throw std::invalid_argument("positivity: p_a0 == p_a1 leaves U_hat uninformative");
  }
}

}  // namespace

double decision_boundary(const BinaryParams& params) { return 0.5 * (params.p_a0 + params.p_a1); }

int u_hat_from_count(int s, int m, const BinaryParams& params) {
  if (m < 1) throw std::invalid_argument("u_hat: need at least one cause");
  const double p_hat = static_cast<double>(s) / static_cast<double>(m);
  return p_hat > decision_boundary(params) ? 1 : 0;
}

int u_hat(std::span<const std::uint8_t> a, const BinaryParams& params) {
  int s = 0;
  for (std::uint8_t bit : a) s += bit;
  return u_hat_from_count(s, static_cast<int>(a.size()), params);
}

Misclassification misclassification(const BinaryParams& params, int m, int n, std::uint64_t seed) {
  check_latent(params);
  if (m < 1) throw std::invalid_argument("misclassification: m must be >= 1");
  if (n < 1) throw std::invalid_argument("misclassification: n must be >= 1");

  Rng rng(seed);
  long wrong0 = 0;
  long wrong1 = 0;
  Misclassification out;
  out.n = n;
  for (int i = 0; i < n; ++i) {
    const int u = rng.bernoulli(params.pi_u) ? 1 : 0;
    int s = 0;
    for (int k = 0; k < m; ++k) s += rng.bernoulli(params.p_a(u)) ? 1 : 0;
    const int guess = u_hat_from_count(s, m, params);
    if (u == 0) {
      ++out.n_u0;
      wrong0 += guess;
    } else {
      ++out.n_u1;
      wrong1 += 1 - guess;
    }
  }
  out.rate = static_cast<double>(wrong0 + wrong1) / n;
  out.p_hat1_given_u0 = out.n_u0 > 0 ? static_cast<double>(wrong0) / out.n_u0 : 0.0;
  out.p_hat0_given_u1 = out.n_u1 > 0 ? static_cast<double>(wrong1) / out.n_u1 : 0.0;
  out.standard_error = std::sqrt(out.rate * (1.0 - out.rate) / n);
  return out;
}

double misclassification_rate(const BinaryParams& params, int m, int n, std::uint64_t seed) {
  return misclassification(params, m, n, seed).rate;
}

double hoeffding_bound(const BinaryParams& params, int m) {
  const double delta = 0.5 * (params.p_a1 - params.p_a0);
  return std::exp(-2.0 * m * delta * delta);
}

std::vector<ProjectionSample> projection_cloud(const BinaryParams& params, int m, int n,
                                               std::uint64_t seed) {
  check_latent(params);
  if (m < 2 || m % 2 != 0) {
    throw std::invalid_argument("projection_cloud: m must be a positive even number, got "
                                + std::to_string(m));
  }
  if (n < 1) throw std::invalid_argument("projection_cloud: n must be >= 1");

  const double inv_root_m = 1.0 / std::sqrt(static_cast<double>(m));
  Rng rng(seed);
  std::vector<ProjectionSample> cloud;
  cloud.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ProjectionSample sample;
    sample.u = rng.bernoulli(params.pi_u) ? 1 : 0;
    int first_half = 0;
    int second_half = 0;
    for (int k = 0; k < m; ++k) {
      const int bit = rng.bernoulli(params.p_a(sample.u)) ? 1 : 0;
      (k < m / 2 ? first_half : second_half) += bit;
    }
    const int s = first_half + second_half;
    sample.x1 = static_cast<double>(s) / m;
    sample.x2 = (first_half - second_half) * inv_root_m;
    sample.u_hat = u_hat_from_count(s, m, params);
    cloud.push_back(sample);
  }
  return cloud;
}

double separation_statistic(std::span<const ProjectionSample> cloud) {
  if (cloud.empty()) return 0.0;
  std::size_t wrong = 0;
  for (const auto& s : cloud) wrong += s.u != s.u_hat ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(cloud.size());
}

}  // namespace mcid::positivity
