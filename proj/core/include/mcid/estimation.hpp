#pragma once

#include "mcid/binary_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcid::estimation {

using binary::BinaryParams;

// P(Z_j = 1 | U = u), indexed by u.
struct ProxyParams {
  std::array<double, 2> p_z1{0.2, 0.8};
  std::array<double, 2> p_z2{0.2, 0.8};

  void validate() const;
};

// Full parameter vector of the fitted model: the binary model plus optional
// proxy emission probabilities.
struct Theta {
  BinaryParams model;
  std::optional<ProxyParams> proxies;
};

struct Record {
  std::vector<std::uint8_t> a;
  std::uint8_t y = 0;
  std::optional<std::array<std::uint8_t, 2>> z;
};

struct Dataset {
  std::vector<Record> rows;
  std::uint64_t seed = 0;

  int m() const { return rows.empty() ? 0 : static_cast<int>(rows.front().a.size()); }
  bool has_proxies() const { return !rows.empty() && rows.front().z.has_value(); }
  // Throws std::invalid_argument on non-binary entries or ragged rows.
  void validate() const;
};

// Row counts by (S(a), y, z1 + 2 z2). The likelihood depends on the data only
// through these counts; without proxies the z index is always 0.
struct SufficientStats {
  int m = 0;
  bool proxies = false;
  std::vector<double> counts;

  static SufficientStats from(const Dataset& data, bool use_proxies);
  int z_levels() const { return proxies ? 4 : 1; }
  double count(int s, int y, int z) const {
    return counts[static_cast<std::size_t>((s * 2 + y) * z_levels() + z)];
  }
  double total() const;
};

struct FitConfig {
  double lambda = 0.1;
  double gamma_target = 0.0;
  std::vector<std::uint8_t> target_a{1, 1, 1, 1, 1, 0};
  int max_iters = 5000;
  double step_size = 1.0;
  double tol = 1e-3;
  int restarts = 5;
  std::uint64_t seed = 0;
  // Overrides the random initial logit of pi_U. A non-finite value holds pi_U
  // fixed at 0 or 1 for the whole fit.
  std::optional<double> pi_u_logit_init;

  void validate() const;
};

struct FitResult {
  Theta params_hat;
  double pi_do_hat = 0.0;
  double gamma_hat = 0.0;
  double loglik = 0.0;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Raised when no restart reaches a finite objective value.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n iid rows from the structural model; U is drawn and discarded.
Dataset sample_dataset(const BinaryParams& params, const std::optional<ProxyParams>& proxies,
                       int n, std::uint64_t seed);

// Marginal log-likelihood with U summed out. Returns -inf if some row has zero
// probability under theta. Proxy columns are ignored when theta has no proxies.
double log_likelihood(const Theta& theta, const Dataset& data);

// Log-odds ratio of the model-implied table P(U, Y | A = a). Under the
// outcome-only-through-S(a) model it reduces to
// logit p_Y(1, S(a)) - logit p_Y(0, S(a)).
double log_odds_ratio(const Theta& theta, std::span<const std::uint8_t> a);

// log_likelihood - lambda (gamma - gamma_target)^2, with gamma taken under the
// canonical labeling p_a1 > p_a0.
double penalized_objective(const Theta& theta, const Dataset& data, const FitConfig& config);

// Layout of the unconstrained (logit) parameter vector:
//   [pi_u, p_a0, p_a1, p_y(0, 0..m), p_y(1, 0..m), (p_z1(0), p_z1(1), p_z2(0), p_z2(1))]
int parameter_count(int m, bool proxies);
Eigen::VectorXd to_unconstrained(const Theta& theta);
Theta from_unconstrained(const Eigen::VectorXd& x, int m, bool proxies);

// Penalized objective on logit space with its analytic gradient.
class PenalizedObjective {
 public:
  PenalizedObjective(SufficientStats stats, const FitConfig& config);

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;
  double value(const Eigen::VectorXd& x) const;
  int dimension() const { return parameter_count(stats_.m, stats_.proxies); }

 private:
  SufficientStats stats_;
  double lambda_;
  double gamma_target_;
  int target_s_;
};

// Swaps the latent labels when p_a1 < p_a0.
Theta canonical_labels(Theta theta);

// Penalized maximum likelihood from random restarts; the best restart wins.
// Throws NumericalFailure if every restart diverges.
FitResult fit(const Dataset& data, const FitConfig& config, bool with_proxies);

// Maximized log-likelihood with gamma pinned near each grid value by a stiff
// penalty.
std::vector<double> profile_log_likelihood(const Dataset& data, const FitConfig& config,
                                           std::span<const double> gamma_grid,
                                           bool with_proxies);

}  // namespace mcid::estimation
