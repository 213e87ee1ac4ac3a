#include "mcid/binary_model.hpp"
#include "mcid/estimation.hpp"
#include "mcid/linear_gaussian.hpp"
#include "mcid/positivity.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace mcid;

binary::BinaryParams canonical(int m = 6, double p_a0 = 0.3) {
  return binary::BinaryParams::with_logistic_outcome(m, 0.3, p_a0, 1.0 - p_a0, 0.5, 2.0);
}

void BM_IgnoranceRegion(benchmark::State& state) {
  const auto p = canonical(static_cast<int>(state.range(0)), 0.1);
  for (auto _ : state) {
    for (int s = 0; s <= p.m; ++s) benchmark::DoNotOptimize(binary::ignorance_region(p, s));
  }
  state.SetItemsProcessed(state.iterations() * (p.m + 1));
}
BENCHMARK(BM_IgnoranceRegion)->Arg(6)->Arg(128);

void BM_EquivalentParams(benchmark::State& state) {
  const auto p = linear::StructuralParams::constant(state.range(0), 0.5, 0.2, 1.0, 1.0, 1.0, 2.0);
  const linear::ScalingFactor c(1.5);
  for (auto _ : state) benchmark::DoNotOptimize(linear::equivalent_params(p, c));
}
BENCHMARK(BM_EquivalentParams)->RangeMultiplier(10)->Range(10, 1000);

// One value-and-gradient evaluation on n = 15000 rows; the cost is in the
// sufficient statistics, so it does not grow with n.
void BM_ObjectiveGradient(benchmark::State& state) {
  const bool proxies = state.range(0) != 0;
  const auto data = estimation::sample_dataset(canonical(), estimation::ProxyParams{}, 15000, 1);
  const estimation::PenalizedObjective f(estimation::SufficientStats::from(data, proxies),
                                         estimation::FitConfig{});
  Eigen::VectorXd x = Eigen::VectorXd::Constant(f.dimension(), 0.1);
  Eigen::VectorXd g(x.size());
  for (auto _ : state) benchmark::DoNotOptimize(f(x, g));
}
BENCHMARK(BM_ObjectiveGradient)->Arg(0)->Arg(1);

void BM_Fit(benchmark::State& state) {
  const bool proxies = state.range(0) != 0;
  const auto data = estimation::sample_dataset(canonical(), estimation::ProxyParams{}, 15000, 1);
  estimation::FitConfig config;
  config.gamma_target = 2.0;
  config.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(estimation::fit(data, config, proxies));
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SampleDataset(benchmark::State& state) {
  const auto p = canonical();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimation::sample_dataset(p, estimation::ProxyParams{}, static_cast<int>(state.range(0)), 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleDataset)->Arg(15000)->Unit(benchmark::kMillisecond);

void BM_Misclassification(benchmark::State& state) {
  const auto p = canonical(2, 0.1);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(positivity::misclassification_rate(p, m, 10000, 9));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Misclassification)->Arg(8)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
