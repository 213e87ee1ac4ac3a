#pragma once

#include "mcid/harness/config.hpp"
#include "mcid/harness/output.hpp"

#include <cstdint>
#include <vector>

namespace mcid::harness {

struct RunOptions {
  unsigned threads = 0;  // 0: one per hardware thread
};

// Each run returns its files in write order. Results do not depend on the
// thread count: every task draws from its own derived seed and rows are
// collected by index before formatting.
std::vector<OutputFile> run_linear_ignorance(const LinearConfig& config);
std::vector<OutputFile> run_binary_ignorance(const BinaryConfig& config);
std::vector<OutputFile> run_estimate(const EstimateConfig& config, std::uint64_t seed,
                                     const RunOptions& options = {});
std::vector<OutputFile> run_positivity(const PositivityConfig& config, std::uint64_t seed,
                                       const RunOptions& options = {});

std::vector<OutputFile> run_experiment(const ExperimentConfig& config,
                                       const RunOptions& options = {});

}  // namespace mcid::harness
