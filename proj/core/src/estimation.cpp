#include "mcid/estimation.hpp"

#include "mcid/optimize.hpp"
#include "mcid/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace mcid::estimation {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double log_sigmoid(double x) { return -softplus(-x); }

double logit(double p) { return std::log(p) - std::log1p(-p); }

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// k * log p, treating 0 * (-inf) as 0.
double weighted(double k, double log_p) { return k == 0.0 ? 0.0 : k * log_p; }

int target_count(std::span<const std::uint8_t> a) {
  return std::accumulate(a.begin(), a.end(), 0);
}

void require_binary(std::uint8_t v) {
  if (v > 1) {
    throw std::invalid_argument("Dataset: entries must be 0 or 1");
  }
}

struct Layout {
  int m;
  bool proxies;
  int pi() const { return 0; }
  int pa(int u) const { return 1 + u; }
  int py(int u, int s) const { return 3 + u * (m + 1) + s; }
  int pz(int j, int u) const { return 3 + 2 * (m + 1) + 2 * j + u; }
  int size() const { return 3 + 2 * (m + 1) + (proxies ? 4 : 0); }
};

}  // namespace

void ProxyParams::validate() const {
  for (double p : {p_z1[0], p_z1[1], p_z2[0], p_z2[1]}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("ProxyParams: probabilities must lie in [0, 1]");
    }
  }
}

void Dataset::validate() const {
  const int width = m();
  const bool proxies = has_proxies();
  for (const Record& r : rows) {
    if (static_cast<int>(r.a.size()) != width || r.z.has_value() != proxies) {
      throw std::invalid_argument("Dataset: rows must share the same arity");
    }
    std::for_each(r.a.begin(), r.a.end(), require_binary);
    require_binary(r.y);
    if (r.z) {
      require_binary((*r.z)[0]);
      require_binary((*r.z)[1]);
    }
  }
}

SufficientStats SufficientStats::from(const Dataset& data, bool use_proxies) {
  if (use_proxies && !data.has_proxies()) {
    throw std::invalid_argument("SufficientStats: proxy columns requested but data has none");
  }
  SufficientStats stats;
  stats.m = data.m();
  stats.proxies = use_proxies;
  stats.counts.assign(static_cast<std::size_t>((stats.m + 1) * 2 * stats.z_levels()), 0.0);
  for (const Record& r : data.rows) {
    const int s = target_count(r.a);
    const int z = use_proxies ? (*r.z)[0] + 2 * (*r.z)[1] : 0;
    stats.counts[static_cast<std::size_t>((s * 2 + r.y) * stats.z_levels() + z)] += 1.0;
  }
  return stats;
}

double SufficientStats::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

void FitConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("FitConfig: lambda must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("FitConfig: tol must be > 0");
  if (!(step_size > 0.0)) throw std::invalid_argument("FitConfig: step_size must be > 0");
  if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be >= 1");
  if (target_a.empty()) throw std::invalid_argument("FitConfig: target_a is empty");
  std::for_each(target_a.begin(), target_a.end(), require_binary);
}

Dataset sample_dataset(const BinaryParams& params, const std::optional<ProxyParams>& proxies,
                       int n, std::uint64_t seed) {
  params.validate();
  if (proxies) proxies->validate();
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");

  Rng rng(seed);
  Dataset data;
  data.seed = seed;
  data.rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Record r;
    const int u = rng.bernoulli(params.pi_u) ? 1 : 0;
    r.a.resize(static_cast<std::size_t>(params.m));
    int s = 0;
    for (auto& bit : r.a) {
      bit = rng.bernoulli(params.p_a(u)) ? 1 : 0;
      s += bit;
    }
    r.y = rng.bernoulli(params.outcome(u, s)) ? 1 : 0;
    if (proxies) {
      const std::uint8_t z1 = rng.bernoulli(proxies->p_z1[static_cast<std::size_t>(u)]) ? 1 : 0;
      const std::uint8_t z2 = rng.bernoulli(proxies->p_z2[static_cast<std::size_t>(u)]) ? 1 : 0;
      r.z = std::array<std::uint8_t, 2>{z1, z2};
    }
    data.rows.push_back(std::move(r));
  }
  return data;
}

int parameter_count(int m, bool proxies) { return Layout{m, proxies}.size(); }

Eigen::VectorXd to_unconstrained(const Theta& theta) {
  const BinaryParams& p = theta.model;
  const Layout at{p.m, theta.proxies.has_value()};
  Eigen::VectorXd x(at.size());
  x(at.pi()) = logit(p.pi_u);
  x(at.pa(0)) = logit(p.p_a0);
  x(at.pa(1)) = logit(p.p_a1);
  for (int u = 0; u <= 1; ++u) {
    for (int s = 0; s <= p.m; ++s) x(at.py(u, s)) = logit(p.outcome(u, s));
  }
  if (theta.proxies) {
    for (int u = 0; u <= 1; ++u) {
      x(at.pz(0, u)) = logit(theta.proxies->p_z1[static_cast<std::size_t>(u)]);
      x(at.pz(1, u)) = logit(theta.proxies->p_z2[static_cast<std::size_t>(u)]);
    }
  }
  return x;
}

Theta from_unconstrained(const Eigen::VectorXd& x, int m, bool proxies) {
  const Layout at{m, proxies};
  if (x.size() != at.size()) {
    throw std::invalid_argument("from_unconstrained: vector length does not match layout");
  }
  Theta theta;
  BinaryParams& p = theta.model;
  p.m = m;
  p.pi_u = binary::logistic(x(at.pi()));
  p.p_a0 = binary::logistic(x(at.pa(0)));
  p.p_a1 = binary::logistic(x(at.pa(1)));
  p.p_y.resize(static_cast<std::size_t>(2 * (m + 1)));
  for (int u = 0; u <= 1; ++u) {
    for (int s = 0; s <= m; ++s) p.outcome(u, s) = binary::logistic(x(at.py(u, s)));
  }
  if (proxies) {
    ProxyParams z;
    for (int u = 0; u <= 1; ++u) {
      z.p_z1[static_cast<std::size_t>(u)] = binary::logistic(x(at.pz(0, u)));
      z.p_z2[static_cast<std::size_t>(u)] = binary::logistic(x(at.pz(1, u)));
    }
    theta.proxies = z;
  }
  return theta;
}

PenalizedObjective::PenalizedObjective(SufficientStats stats, const FitConfig& config)
    : stats_(std::move(stats)),
      lambda_(config.lambda),
      gamma_target_(config.gamma_target),
      target_s_(target_count(config.target_a)) {
  config.validate();
  if (static_cast<int>(config.target_a.size()) != stats_.m) {
    throw std::invalid_argument("PenalizedObjective: target_a length differs from m");
  }
}

double PenalizedObjective::value(const Eigen::VectorXd& x) const {
  Eigen::VectorXd unused;
  return (*this)(x, unused);
}

double PenalizedObjective::operator()(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  const int m = stats_.m;
  const Layout at{m, stats_.proxies};
  grad.setZero(at.size());

  const double pi = binary::logistic(x(at.pi()));
  std::array<double, 2> log_w{log_sigmoid(-x(at.pi())), log_sigmoid(x(at.pi()))};
  std::array<double, 2> pa{}, log_a{}, log_not_a{};
  for (int u = 0; u <= 1; ++u) {
    pa[u] = binary::logistic(x(at.pa(u)));
    log_a[u] = log_sigmoid(x(at.pa(u)));
    log_not_a[u] = log_sigmoid(-x(at.pa(u)));
  }
  // log P(z_j = v | u) and P(z_j = 1 | u)
  std::array<std::array<std::array<double, 2>, 2>, 2> log_z{};
  std::array<std::array<double, 2>, 2> pz{};
  if (stats_.proxies) {
    for (int j = 0; j < 2; ++j) {
      for (int u = 0; u <= 1; ++u) {
        const double t = x(at.pz(j, u));
        pz[j][u] = binary::logistic(t);
        log_z[j][u] = {log_sigmoid(-t), log_sigmoid(t)};
      }
    }
  }

  const int zl = stats_.z_levels();
  double total = 0.0;
  for (int s = 0; s <= m; ++s) {
    for (int y = 0; y <= 1; ++y) {
      for (int z = 0; z < zl; ++z) {
        const double n = stats_.count(s, y, z);
        if (n == 0.0) continue;
        const int z1 = z & 1;
        const int z2 = (z >> 1) & 1;
        std::array<double, 2> ell{};
        for (int u = 0; u <= 1; ++u) {
          const double t = x(at.py(u, s));
          ell[u] = log_w[u] + weighted(s, log_a[u]) + weighted(m - s, log_not_a[u])
                   + (y == 1 ? log_sigmoid(t) : log_sigmoid(-t));
          if (stats_.proxies) ell[u] += log_z[0][u][z1] + log_z[1][u][z2];
          if (std::isnan(ell[u])) ell[u] = kNegInf;
        }
        const double cell = log_add(ell[0], ell[1]);
        if (cell == kNegInf) {
          grad.setZero();
          return kNegInf;
        }
        total += n * cell;
        for (int u = 0; u <= 1; ++u) {
          const double r = n * std::exp(ell[u] - cell);
          if (r == 0.0) continue;
          grad(at.pi()) += r * ((u == 1 ? 1.0 : 0.0) - pi);
          grad(at.pa(u)) += r * (s - m * pa[u]);
          grad(at.py(u, s)) += r * (y - binary::logistic(x(at.py(u, s))));
          if (stats_.proxies) {
            grad(at.pz(0, u)) += r * (z1 - pz[0][u]);
            grad(at.pz(1, u)) += r * (z2 - pz[1][u]);
          }
        }
      }
    }
  }

  if (lambda_ > 0.0) {
    const double sign = x(at.pa(1)) >= x(at.pa(0)) ? 1.0 : -1.0;
    const double gamma = sign * (x(at.py(1, target_s_)) - x(at.py(0, target_s_)));
    if (!std::isfinite(gamma)) {
      grad.setZero();
      return kNegInf;
    }
    const double diff = gamma - gamma_target_;
    total -= lambda_ * diff * diff;
    const double d = 2.0 * lambda_ * diff * sign;
    grad(at.py(1, target_s_)) -= d;
    grad(at.py(0, target_s_)) += d;
  }
  return total;
}

double log_likelihood(const Theta& theta, const Dataset& data) {
  if (data.m() != theta.model.m) {
    throw std::invalid_argument("log_likelihood: data has " + std::to_string(data.m())
                                + " causes but theta has m=" + std::to_string(theta.model.m));
  }
  const bool proxies = theta.proxies.has_value();
  FitConfig plain;
  plain.lambda = 0.0;
  plain.target_a.assign(static_cast<std::size_t>(theta.model.m), 0);
  const PenalizedObjective objective(SufficientStats::from(data, proxies), plain);
  return objective.value(to_unconstrained(theta));
}

double log_odds_ratio(const Theta& theta, std::span<const std::uint8_t> a) {
  const BinaryParams& p = theta.model;
  if (static_cast<int>(a.size()) != p.m) {
    throw std::invalid_argument("log_odds_ratio: cause vector length differs from m");
  }
  const int s = target_count(a);
  return logit(p.outcome(1, s)) - logit(p.outcome(0, s));
}

double penalized_objective(const Theta& theta, const Dataset& data, const FitConfig& config) {
  if (data.m() != theta.model.m) {
    throw std::invalid_argument("penalized_objective: data arity differs from theta");
  }
  const PenalizedObjective objective(SufficientStats::from(data, theta.proxies.has_value()),
                                     config);
  return objective.value(to_unconstrained(theta));
}

Theta canonical_labels(Theta theta) {
  BinaryParams& p = theta.model;
  if (!(p.p_a1 < p.p_a0)) return theta;
  std::swap(p.p_a0, p.p_a1);
  p.pi_u = 1.0 - p.pi_u;
  for (int s = 0; s <= p.m; ++s) std::swap(p.outcome(0, s), p.outcome(1, s));
  if (theta.proxies) {
    std::swap(theta.proxies->p_z1[0], theta.proxies->p_z1[1]);
    std::swap(theta.proxies->p_z2[0], theta.proxies->p_z2[1]);
  }
  return theta;
}

namespace {

AscentResult best_restart(const PenalizedObjective& objective, const FitConfig& config,
                          int dimension) {
  AscentOptions options;
  options.max_iters = config.max_iters;
  options.step_size = config.step_size;
  options.tol = config.tol;
  options.frozen.assign(static_cast<std::size_t>(dimension), false);

  std::optional<AscentResult> best;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(r)}));
    Eigen::VectorXd x0(dimension);
    for (Eigen::Index i = 0; i < dimension; ++i) x0(i) = rng.uniform(-1.0, 1.0);
    if (config.pi_u_logit_init) {
      x0(0) = *config.pi_u_logit_init;
      options.frozen[0] = !std::isfinite(*config.pi_u_logit_init);
    }
    AscentResult result =
        maximize([&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return objective(x, g); },
                 std::move(x0), options);
    if (!std::isfinite(result.value)) continue;
    if (!best || result.value > best->value) best = std::move(result);
  }
  if (!best) {
    throw NumericalFailure("fit: every restart ended at a non-finite objective");
  }
  return *std::move(best);
}

}  // namespace

FitResult fit(const Dataset& data, const FitConfig& config, bool with_proxies) {
  config.validate();
  if (data.rows.empty()) throw std::invalid_argument("fit: dataset is empty");
  data.validate();
  if (with_proxies && !data.has_proxies()) {
    throw std::invalid_argument("fit: with_proxies requires rows carrying z");
  }
  const int m = data.m();
  const PenalizedObjective objective(SufficientStats::from(data, with_proxies), config);
  const AscentResult ascent = best_restart(objective, config, objective.dimension());

  Theta theta = from_unconstrained(ascent.x, m, with_proxies);
  const bool pi_fixed = config.pi_u_logit_init && !std::isfinite(*config.pi_u_logit_init);
  if (pi_fixed) {
    theta.model.pi_u = *config.pi_u_logit_init > 0.0 ? 1.0 : 0.0;
  } else {
    theta = canonical_labels(std::move(theta));
  }

  FitResult result;
  result.params_hat = theta;
  result.pi_do_hat = binary::intervention_prob(theta.model, target_count(config.target_a));
  result.gamma_hat = log_odds_ratio(theta, config.target_a);
  result.loglik = log_likelihood(theta, data);
  result.objective = ascent.value;
  result.converged = ascent.converged;
  result.iterations = ascent.iterations;
  return result;
}

std::vector<double> profile_log_likelihood(const Dataset& data, const FitConfig& config,
                                           std::span<const double> gamma_grid,
                                           bool with_proxies) {
  std::vector<double> profile;
  profile.reserve(gamma_grid.size());
  for (double gamma : gamma_grid) {
    FitConfig pinned = config;
    pinned.lambda = 1e4;
    pinned.gamma_target = gamma;
    profile.push_back(fit(data, pinned, with_proxies).loglik);
  }
  return profile;
}

}  // namespace mcid::estimation
