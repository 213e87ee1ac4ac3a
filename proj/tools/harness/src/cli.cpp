#include "mcid/harness/cli.hpp"

#include "mcid/estimation.hpp"
#include "mcid/harness/config.hpp"
#include "mcid/harness/experiments.hpp"
#include "mcid/harness/output.hpp"
#include "mcid/version.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ostream>
#include <stdexcept>

namespace mcid::harness {

namespace {

struct Request {
  std::string config;
  std::string out;
  unsigned threads = 0;
};

int execute(Experiment experiment, const Request& req, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(req.config, experiment);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<OutputFile> files;
  try {
    files = run_experiment(config, RunOptions{req.threads});
  } catch (const estimation::NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    // anything the config layer let through but a model rejected
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto entries = write_run(req.out, files, experiment_name(experiment), config.resolved_json, wall);
  for (const auto& e : entries) out << e.sha256 << "  " << e.name << '\n';
  out << "wrote " << entries.size() << " files and manifest.json to " << req.out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ignorance regions and identification experiments for multi-cause models", "mcid"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Request req;
  std::optional<Experiment> chosen;
  for (Experiment e : {Experiment::kLinearIgnorance, Experiment::kBinaryIgnorance,
                       Experiment::kEstimate, Experiment::kPositivity}) {
    const std::string name(experiment_name(e));
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", req.config, "YAML experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", req.out, "Output directory (created if missing)")->required();
    sub->add_option("--threads", req.threads, "Worker threads, 0 = all cores")->capture_default_str();
    sub->callback([&chosen, e] { chosen = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    // a missing or unreadable --config file is a config error, not a usage error
    if (dynamic_cast<const CLI::ValidationError*>(&e)) return kExitConfig;
    return kExitUsage;
  }

  try {
    return execute(*chosen, req, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace mcid::harness
