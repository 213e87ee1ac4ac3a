#include "mcid/estimation.hpp"
#include "mcid/optimize.hpp"
#include "mcid/random.hpp"

#include "enumeration_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

namespace mcid::estimation {
namespace {

using mcid::testing::enumerate_at;

BinaryParams canonical(double p_a0 = 0.3) {
  return BinaryParams::with_logistic_outcome(6, 0.3, p_a0, 1.0 - p_a0, 0.5, 2.0);
}

BinaryParams random_model(Rng& rng, int m) {
  BinaryParams p;
  p.m = m;
  p.pi_u = rng.uniform(0.1, 0.9);
  p.p_a0 = rng.uniform(0.05, 0.45);
  p.p_a1 = rng.uniform(0.55, 0.95);
  p.p_y.resize(static_cast<std::size_t>(2 * (m + 1)));
  for (double& v : p.p_y) v = rng.uniform(0.05, 0.95);
  return p;
}

std::uint32_t bits_of(const Record& r) {
  std::uint32_t bits = 0;
  for (std::size_t k = 0; k < r.a.size(); ++k) bits |= static_cast<std::uint32_t>(r.a[k]) << k;
  return bits;
}

TEST(SampleDataset, SameSeedIsBitIdentical) {
  const auto a = sample_dataset(canonical(), ProxyParams{}, 2000, 99);
  const auto b = sample_dataset(canonical(), ProxyParams{}, 2000, 99);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].a, b.rows[i].a);
    EXPECT_EQ(a.rows[i].y, b.rows[i].y);
    EXPECT_EQ(a.rows[i].z, b.rows[i].z);
  }
  EXPECT_EQ(a.seed, 99u);
  const auto c = sample_dataset(canonical(), ProxyParams{}, 2000, 100);
  EXPECT_NE(SufficientStats::from(a, true).counts, SufficientStats::from(c, true).counts);
}

TEST(SampleDataset, DegenerateLatentUsesUZeroOnly) {
  BinaryParams p = canonical();
  p.pi_u = 0.0;
  const int n = 40000;
  const auto data = sample_dataset(p, std::nullopt, n, 3);
  for (int k = 0; k < p.m; ++k) {
    double mean = 0.0;
    for (const auto& r : data.rows) mean += r.a[static_cast<std::size_t>(k)];
    mean /= n;
    EXPECT_NEAR(mean, p.p_a0, 4.0 * std::sqrt(p.p_a0 * (1 - p.p_a0) / n));
  }
}

TEST(SampleDataset, MomentsMatchEnumeration) {
  for (double p_a0 : {0.1, 0.3}) {
    const BinaryParams p = canonical(p_a0);
    const int n = 15000;
    double p_y1 = 0.0;
    const auto dist = mcid::testing::enumerated_count_distribution(p, &p_y1);
    double mean_s = 0.0, second = 0.0;
    for (int s = 0; s <= p.m; ++s) {
      mean_s += s * dist[static_cast<std::size_t>(s)];
      second += s * s * dist[static_cast<std::size_t>(s)];
    }
    const double var_s = second - mean_s * mean_s;

    const auto data = sample_dataset(p, std::nullopt, n, 12345);
    double emp_y = 0.0, emp_s = 0.0;
    for (const auto& r : data.rows) {
      emp_y += r.y;
      for (auto bit : r.a) emp_s += bit;
    }
    emp_y /= n;
    emp_s /= n;
    EXPECT_NEAR(emp_y, p_y1, 3.0 * std::sqrt(p_y1 * (1 - p_y1) / n));
    EXPECT_NEAR(emp_s, mean_s, 3.0 * std::sqrt(var_s / n));
  }
}

TEST(SampleDataset, RejectsEmpty) {
  EXPECT_THROW(sample_dataset(canonical(), std::nullopt, 0, 1), std::invalid_argument);
}

TEST(LogLikelihood, SingleRowCertainLatent) {
  BinaryParams p = canonical();
  p.pi_u = 1.0;
  Dataset data;
  data.rows.push_back(Record{{1, 0, 1, 1, 0, 0}, 1, std::nullopt});
  const double expected = 3 * std::log(p.p_a1) + 3 * std::log(1 - p.p_a1) + std::log(p.outcome(1, 3));
  EXPECT_NEAR(log_likelihood(Theta{p, std::nullopt}, data), expected, 1e-12);
}

TEST(LogLikelihood, ImpossibleOutcomeIsNegativeInfinity) {
  BinaryParams p = canonical();
  std::fill(p.p_y.begin(), p.p_y.end(), 0.0);
  Dataset data;
  data.rows.push_back(Record{{1, 1, 0, 0, 0, 0}, 1, std::nullopt});
  EXPECT_EQ(log_likelihood(Theta{p, std::nullopt}, data), -std::numeric_limits<double>::infinity());
  data.rows.front().y = 0;
  EXPECT_TRUE(std::isfinite(log_likelihood(Theta{p, std::nullopt}, data)));
}

// Oracle: per-row log P(a, y) by enumeration; average compared with the
// entropy rate E[log P(A, Y)].
TEST(LogLikelihood, AverageMatchesEntropyRate) {
  const BinaryParams p = canonical(0.1);
  const int n = 15000;
  const auto data = sample_dataset(p, std::nullopt, n, 2718);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& r : data.rows) {
    const auto e = enumerate_at(p, bits_of(r));
    const double v = std::log(r.y == 1 ? e.p_y1_a : e.p_a - e.p_y1_a);
    sum += v;
    sum_sq += v * v;
  }
  const double ll = log_likelihood(Theta{p, std::nullopt}, data);
  EXPECT_NEAR(ll, sum, 1e-8 * std::abs(sum));
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(ll / n, mcid::testing::enumerated_entropy_rate(p), 3.0 * se);
}

TEST(LogLikelihood, ArityMismatch) {
  const auto data = sample_dataset(canonical(), std::nullopt, 10, 1);
  BinaryParams other = BinaryParams::with_logistic_outcome(4, 0.3, 0.2, 0.8, 0.5, 2.0);
  EXPECT_THROW(log_likelihood(Theta{other, std::nullopt}, data), std::invalid_argument);
  EXPECT_THROW(log_likelihood(Theta{canonical(), ProxyParams{}}, data), std::invalid_argument);
}

TEST(PenalizedObjective, ZeroPenaltyEqualsLikelihood) {
  const auto data = sample_dataset(canonical(), std::nullopt, 500, 8);
  FitConfig config;
  config.lambda = 0.0;
  config.gamma_target = 3.0;
  const Theta theta{canonical(), std::nullopt};
  EXPECT_DOUBLE_EQ(penalized_objective(theta, data, config), log_likelihood(theta, data));
}

TEST(PenalizedObjective, IndependenceTablePenalty) {
  BinaryParams p = canonical();
  p.outcome(0, 5) = p.outcome(1, 5) = 0.6;  // Y independent of U at S(a) = 5
  const Theta theta{p, std::nullopt};
  EXPECT_NEAR(log_odds_ratio(theta, std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0}), 0.0, 1e-15);
  const auto data = sample_dataset(canonical(), std::nullopt, 300, 4);
  FitConfig config;
  config.lambda = 0.1;
  config.gamma_target = 2.5;
  EXPECT_NEAR(penalized_objective(theta, data, config),
              log_likelihood(theta, data) - 0.1 * 2.5 * 2.5, 1e-9);
}

TEST(PenalizedObjective, LogOddsRatioMatchesTableDefinition) {
  const BinaryParams p = canonical();
  const auto t = binary::model_table(p, 5);
  const double direct = std::log((t.p11 / t.p10) / (t.p01 / t.p00));
  EXPECT_NEAR(log_odds_ratio(Theta{p, std::nullopt}, std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0}),
              direct, 1e-12);
}

TEST(PenalizedObjective, DegenerateTableGivesNegativeInfinity) {
  BinaryParams p = canonical();
  p.outcome(0, 5) = 0.0;
  const auto data = sample_dataset(canonical(), std::nullopt, 50, 4);
  FitConfig config;
  EXPECT_EQ(penalized_objective(Theta{p, std::nullopt}, data, config),
            -std::numeric_limits<double>::infinity());
}

// Finite-difference oracle at random points, with and without proxies.
TEST(PenalizedObjective, GradientMatchesCentralDifferences) {
  Rng rng(31337);
  for (bool proxies : {false, true}) {
    const BinaryParams truth = random_model(rng, 4);
    const auto data = sample_dataset(truth, ProxyParams{}, 50, rng.next());
    FitConfig config;
    config.lambda = 0.7;
    config.gamma_target = 1.5;
    config.target_a = {1, 1, 0, 1};
    const PenalizedObjective objective(SufficientStats::from(data, proxies), config);
    for (int point = 0; point < 10; ++point) {
      Eigen::VectorXd x(objective.dimension());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-2.0, 2.0);
      Eigen::VectorXd grad;
      objective(x, grad);
      Eigen::VectorXd fd(x.size());
      const double h = 1e-5;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd up = x, down = x;
        up(i) += h;
        down(i) -= h;
        fd(i) = (objective.value(up) - objective.value(down)) / (2 * h);
      }
      EXPECT_LT((grad - fd).norm() / grad.norm(), 1e-4) << "proxies=" << proxies;
    }
  }
}

TEST(Parameterization, RoundTripAndLabelSwap) {
  Theta theta{canonical(), ProxyParams{{0.25, 0.7}, {0.1, 0.85}}};
  const Theta back = from_unconstrained(to_unconstrained(theta), 6, true);
  EXPECT_NEAR(back.model.pi_u, theta.model.pi_u, 1e-14);
  for (std::size_t i = 0; i < theta.model.p_y.size(); ++i) {
    EXPECT_NEAR(back.model.p_y[i], theta.model.p_y[i], 1e-14);
  }
  EXPECT_NEAR(back.proxies->p_z2[1], 0.85, 1e-14);

  // Swapping labels leaves the likelihood unchanged and restores the convention.
  Theta swapped = theta;
  std::swap(swapped.model.p_a0, swapped.model.p_a1);
  swapped.model.pi_u = 1 - swapped.model.pi_u;
  for (int s = 0; s <= 6; ++s) std::swap(swapped.model.outcome(0, s), swapped.model.outcome(1, s));
  std::swap(swapped.proxies->p_z1[0], swapped.proxies->p_z1[1]);
  std::swap(swapped.proxies->p_z2[0], swapped.proxies->p_z2[1]);
  const auto data = sample_dataset(canonical(), ProxyParams{}, 400, 6);
  EXPECT_NEAR(log_likelihood(swapped, data), log_likelihood(theta, data), 1e-9);
  const Theta fixed = canonical_labels(swapped);
  EXPECT_NEAR(fixed.model.pi_u, theta.model.pi_u, 1e-15);
  EXPECT_EQ(fixed.model.p_y, theta.model.p_y);

  // The penalty uses the canonical orientation too.
  FitConfig config;
  config.lambda = 0.5;
  config.gamma_target = -1.0;
  EXPECT_NEAR(penalized_objective(swapped, data, config), penalized_objective(theta, data, config),
              1e-9);
}

TEST(Fit, AscentIsMonotoneOnRealObjective) {
  const auto data = sample_dataset(canonical(), ProxyParams{}, 3000, 77);
  FitConfig config;
  const PenalizedObjective objective(SufficientStats::from(data, true), config);
  AscentOptions options;
  options.tol = config.tol;
  Rng rng(5);
  Eigen::VectorXd x0(objective.dimension());
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.uniform(-1, 1);
  const AscentResult r = maximize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return objective(x, g); }, x0, options);
  for (std::size_t i = 1; i < r.trace.size(); ++i) ASSERT_GE(r.trace[i], r.trace[i - 1]);
  EXPECT_TRUE(r.converged);
}

TEST(Fit, ReproducibleBitForBit) {
  const auto data = sample_dataset(canonical(), std::nullopt, 3000, 5);
  FitConfig config;
  config.seed = 17;
  config.gamma_target = 1.0;
  const FitResult a = fit(data, config, false);
  const FitResult b = fit(data, config, false);
  EXPECT_EQ(std::memcmp(&a.pi_do_hat, &b.pi_do_hat, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&a.loglik, &b.loglik, sizeof(double)), 0);
  EXPECT_EQ(a.params_hat.model.p_y, b.params_hat.model.p_y);
}

TEST(Fit, RecoversModelWithoutLatentStructure) {
  BinaryParams truth = canonical();
  truth.pi_u = 0.0;
  const auto data = sample_dataset(truth, std::nullopt, 15000, 21);
  FitConfig config;
  config.lambda = 0.0;
  config.pi_u_logit_init = -std::numeric_limits<double>::infinity();
  const FitResult r = fit(data, config, false);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.params_hat.model.pi_u, 0.0);
  const double n = 15000.0;
  EXPECT_NEAR(r.params_hat.model.p_a0, truth.p_a0, 4.0 * std::sqrt(0.21 / (6 * n)));
  // S(a) = 3 is the most populated count
  const auto stats = SufficientStats::from(data, false);
  const double n3 = stats.count(3, 0, 0) + stats.count(3, 1, 0);
  const double q = truth.outcome(0, 3);
  EXPECT_NEAR(r.params_hat.model.outcome(0, 3), q, 4.0 * std::sqrt(q * (1 - q) / n3));
}

TEST(Fit, PenaltyMovesEstimateOnlyWithoutProxies) {
  const auto data = sample_dataset(canonical(), ProxyParams{}, 15000, 2024);
  FitConfig config;
  config.seed = 8;
  double standard[2], proxy[2];
  for (int i = 0; i < 2; ++i) {
    config.gamma_target = i == 0 ? -4.0 : 4.0;
    const FitResult s = fit(data, config, false);
    const FitResult p = fit(data, config, true);
    EXPECT_TRUE(s.converged);
    EXPECT_TRUE(p.converged);
    EXPECT_GT(s.params_hat.model.p_a1, s.params_hat.model.p_a0);
    EXPECT_NEAR(s.gamma_hat, config.gamma_target, 0.05);
    standard[i] = s.pi_do_hat;
    proxy[i] = p.pi_do_hat;
  }
  const binary::IgnoranceInterval region = binary::ignorance_region(canonical(), 5);
  EXPECT_GT(standard[0] - standard[1], 0.5 * region.width());
  EXPECT_LT(std::abs(proxy[0] - proxy[1]), 0.2 * (standard[0] - standard[1]));
}

TEST(Fit, ProfileFlatWithoutProxiesCurvedWithProxies) {
  const auto data = sample_dataset(canonical(), ProxyParams{}, 15000, 606);
  FitConfig config;
  config.seed = 2;
  config.restarts = 2;
  const std::vector<double> grid{-2.0, 0.0, 2.0, 4.0};
  const auto standard = profile_log_likelihood(data, config, grid, false);
  const auto proxy = profile_log_likelihood(data, config, grid, true);
  auto range = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };
  EXPECT_LT(range(standard), 0.1);
  EXPECT_LT(range(standard), range(proxy));
}

TEST(Fit, Preconditions) {
  Dataset empty;
  FitConfig config;
  EXPECT_THROW(fit(empty, config, false), std::invalid_argument);
  const auto data = sample_dataset(canonical(), std::nullopt, 20, 1);
  EXPECT_THROW(fit(data, config, true), std::invalid_argument);
  config.max_iters = 0;
  EXPECT_THROW(fit(data, config, false), std::invalid_argument);
}

}  // namespace
}  // namespace mcid::estimation
