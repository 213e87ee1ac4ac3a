#include "mcid/harness/experiments.hpp"

#include "mcid/positivity.hpp"
#include "mcid/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace mcid::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed-stream tags, so that e.g. dataset 3 and fit 3 never share a seed.
enum : std::uint64_t { kDataStream = 1, kFitStream = 2, kCloudStream = 3, kRateStream = 4 };

// Runs body(0..count-1) on a small pool. The first exception is rethrown
// after all workers stop.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; !stop && (i = next++) < count;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

bool is_constant(const Eigen::VectorXd& v) {
  return v.size() > 0 && (v.array() == v(0)).all();
}

}  // namespace

std::vector<OutputFile> run_linear_ignorance(const LinearConfig& config) {
  const linear::StructuralParams& p = config.model;
  const linear::ObservableCov original = linear::observable_covariance(p);
  const bool multiplier_defined = is_constant(p.alpha) && is_constant(p.beta) && p.beta(0) != 0.0;

  CsvTable table("linear_ignorance.csv",
                 {"c", "valid", "s_c", "beta_shift_norm", "sigma2_y1", "cov_residual"});
  for (double cv : config.c_grid) {
    const linear::ScalingFactor c(cv);
    const double sigma2_y1 = linear::implied_outcome_variance(p, c);
    const bool valid = sigma2_y1 > 0.0;
    const Eigen::VectorXd beta1 = linear::shifted_beta(p, c);

    table.cell(cv).cell(valid ? 1 : 0);
    table.cell(multiplier_defined ? linear::ignorance_multiplier(p, c) : kNaN);
    table.cell((beta1 - p.beta).norm()).cell(sigma2_y1);
    if (valid) {
      const auto rebuilt = linear::observable_covariance(linear::equivalent_params(p, c));
      table.cell(linear::ObservableCov::max_relative_difference(rebuilt, original));
    } else {
      table.cell(kNaN);
    }
    table.end_row();
  }
  return {{table.name(), table.contents()}};
}

std::vector<OutputFile> run_binary_ignorance(const BinaryConfig& config) {
  const binary::BinaryParams& p = config.model;
  CsvTable table("binary_ignorance.csv", {"s", "lo", "hi", "pi_do_true", "pi_obs", "width"});
  for (int s : config.s_values) {
    const double post = binary::posterior_u(p, s);
    binary::IgnoranceInterval region;
    if (post == 0.0 || post == 1.0) {
      // The table has a zero margin; only the degenerate bound is available.
      region = binary::degenerate_ignorance(
          p.pi_u, binary::observational_prob(p, s),
          post == 0.0 ? binary::DegenerateSide::kPosteriorToZero
                      : binary::DegenerateSide::kPosteriorToOne);
      region.point_true = binary::intervention_prob(p, s);
    } else {
      region = binary::ignorance_region(p, s);
    }
    table.cell(s).cell(region.lo).cell(region.hi).cell(region.point_true).cell(region.point_obs);
    table.cell(region.width());
    table.end_row();
  }
  return {{table.name(), table.contents()}};
}

std::vector<OutputFile> run_estimate(const EstimateConfig& config, std::uint64_t seed,
                                     const RunOptions& options) {
  const std::size_t reps = static_cast<std::size_t>(config.replications);
  const std::size_t grid = config.gamma_targets.size();
  const std::size_t settings = config.settings.size();

  // One dataset per replication, shared across settings and targets so the
  // comparison is on matched data. The standard setting ignores the proxies.
  std::vector<estimation::Dataset> data(reps);
  parallel_for(reps, options.threads, [&](std::size_t r) {
    data[r] = estimation::sample_dataset(config.model, config.proxies, config.n,
                                         derive_seed(seed, {kDataStream, r}));
  });

  std::vector<estimation::FitResult> results(settings * grid * reps);
  parallel_for(results.size(), options.threads, [&](std::size_t task) {
    const std::size_t r = task % reps;
    const std::size_t g = (task / reps) % grid;
    const std::string& setting = config.settings[task / (reps * grid)];
    const std::uint64_t setting_code = setting == "proxy" ? 1 : 0;
    estimation::FitConfig fc = config.fit;
    fc.gamma_target = config.gamma_targets[g];
    fc.seed = derive_seed(seed, {kFitStream, setting_code, g, r});
    results[task] = estimation::fit(data[r], fc, setting == "proxy");
  });

  CsvTable rows("estimate.csv",
                {"setting", "gamma_target", "rep", "pi_do_hat", "gamma_hat", "converged"});
  CsvTable summary("estimate_summary.csv", {"setting", "gamma_target", "mean_pi_do_hat",
                                            "sd_pi_do_hat", "n_reps", "n_converged"});
  for (std::size_t si = 0; si < settings; ++si) {
    for (std::size_t g = 0; g < grid; ++g) {
      double sum = 0.0;
      int converged = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& fr = results[(si * grid + g) * reps + r];
        rows.cell(config.settings[si]).cell(config.gamma_targets[g]);
        rows.cell(static_cast<long long>(r)).cell(fr.pi_do_hat).cell(fr.gamma_hat);
        rows.cell(fr.converged ? 1 : 0);
        rows.end_row();
        sum += fr.pi_do_hat;
        converged += fr.converged ? 1 : 0;
      }
      const double mean = sum / static_cast<double>(reps);
      double ss = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double d = results[(si * grid + g) * reps + r].pi_do_hat - mean;
        ss += d * d;
      }
      const double sd = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : kNaN;
      summary.cell(config.settings[si]).cell(config.gamma_targets[g]).cell(mean).cell(sd);
      summary.cell(static_cast<long long>(reps)).cell(converged);
      summary.end_row();
    }
  }
  return {{rows.name(), rows.contents()}, {summary.name(), summary.contents()}};
}

std::vector<OutputFile> run_positivity(const PositivityConfig& config, std::uint64_t seed,
                                       const RunOptions& options) {
  const std::size_t count = config.m_values.size();
  std::vector<std::vector<positivity::ProjectionSample>> clouds(count);
  std::vector<double> rates(count);
  parallel_for(count, options.threads, [&](std::size_t i) {
    const auto m = static_cast<std::uint64_t>(config.m_values[i]);
    clouds[i] = positivity::projection_cloud(config.model, config.m_values[i], config.n,
                                             derive_seed(seed, {kCloudStream, m}));
    rates[i] = positivity::misclassification_rate(config.model, config.m_values[i],
                                                  config.rate_samples,
                                                  derive_seed(seed, {kRateStream, m}));
  });

  std::vector<OutputFile> files;
  CsvTable summary("positivity_rates.csv", {"m", "misclass_rate", "hoeffding_bound"});
  for (std::size_t i = 0; i < count; ++i) {
    const int m = config.m_values[i];
    CsvTable cloud("positivity_m" + std::to_string(m) + ".csv", {"u", "x1", "x2", "u_hat"});
    for (const auto& sample : clouds[i]) {
      cloud.cell(sample.u).cell(sample.x1).cell(sample.x2).cell(sample.u_hat);
      cloud.end_row();
    }
    files.push_back({cloud.name(), cloud.contents()});
    summary.cell(m).cell(rates[i]).cell(positivity::hoeffding_bound(config.model, m));
    summary.end_row();
  }
  files.push_back({summary.name(), summary.contents()});
  return files;
}

std::vector<OutputFile> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return std::visit(
      [&](const auto& body) -> std::vector<OutputFile> {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, LinearConfig>) {
          return run_linear_ignorance(body);
        } else if constexpr (std::is_same_v<T, BinaryConfig>) {
          return run_binary_ignorance(body);
        } else if constexpr (std::is_same_v<T, EstimateConfig>) {
          return run_estimate(body, config.seed, options);
        } else {
          return run_positivity(body, config.seed, options);
        }
      },
      config.body);
}

}  // namespace mcid::harness
