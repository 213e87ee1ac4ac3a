#pragma once

#include "mcid/binary_model.hpp"
#include "mcid/estimation.hpp"
#include "mcid/linear_gaussian.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mcid::harness {

enum class Experiment { kLinearIgnorance, kBinaryIgnorance, kEstimate, kPositivity };

std::string_view experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

// Raised for anything wrong with the config file; the message carries
// source:line:column and the dotted field path where one is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearConfig {
  linear::StructuralParams model;
  std::vector<double> c_grid;
};

struct BinaryConfig {
  binary::BinaryParams model;
  std::vector<int> s_values;  // defaults to 0..m
};

struct EstimateConfig {
  binary::BinaryParams model;
  estimation::ProxyParams proxies;
  estimation::FitConfig fit;  // gamma_target and seed are filled per task
  std::vector<double> gamma_targets;
  std::vector<std::string> settings;  // "standard" and/or "proxy"
  int n = 15000;
  int replications = 20;
};

struct PositivityConfig {
  binary::BinaryParams model;  // m and p_y are unused; rates and clouds take m from m_values
  std::vector<int> m_values;
  int n = 500;
  int rate_samples = 100000;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kLinearIgnorance;
  std::uint64_t seed = 0;
  std::variant<LinearConfig, BinaryConfig, EstimateConfig, PositivityConfig> body;
  // Fully resolved config (defaults filled in) as JSON text, echoed into the manifest.
  std::string resolved_json;
};

// `expected` is the subcommand; an `experiment:` key in the file must agree with it.
ExperimentConfig parse_config(std::string_view text, Experiment expected,
                              std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path, Experiment expected);

// start, start+step, ..., up to stop inclusive (with a small tolerance). Values are
// snapped to 12 significant digits so 0.05-step grids print as 0.15, not 0.15000000000000002.
std::vector<double> range_grid(double start, double stop, double step);

}  // namespace mcid::harness
