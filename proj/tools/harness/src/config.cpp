#include "mcid/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mcid::harness {

namespace {

using nlohmann::json;

constexpr std::string_view kNames[] = {"linear-ignorance", "binary-ignorance", "estimate",
                                       "positivity"};

std::string location(std::string_view source, const YAML::Mark& mark) {
  std::ostringstream out;
  out << source;
  if (mark.line >= 0) out << ':' << mark.line + 1 << ':' << mark.column + 1;
  return out.str();
}

// A mapping node plus its dotted path. Tracks which keys were read so that
// unknown (usually misspelled) keys are rejected instead of silently ignored.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::string_view source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_, "", "expected a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  YAML::Node require(const std::string& key) {
    YAML::Node n = get(key);
    if (!n) fail(node_, key, "missing required field");
    return n;
  }

  double number(const std::string& key) { return to_number(require(key), key); }
  double number(const std::string& key, double fallback) {
    YAML::Node n = get(key);
    return n ? to_number(n, key) : fallback;
  }

  int integer(const std::string& key) { return to_integer(require(key), key); }
  int integer(const std::string& key, int fallback) {
    YAML::Node n = get(key);
    return n ? to_integer(n, key) : fallback;
  }

  std::uint64_t seed(const std::string& key) {
    YAML::Node n = require(key);
    const std::string text = scalar(n, key);
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
      fail(n, key, "expected an unsigned 64-bit integer, got '" + text + "'");
    }
    return value;
  }

  std::vector<double> numbers(const std::string& key, YAML::Node n) {
    if (!n.IsSequence()) fail(n, key, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      out.push_back(to_number(n[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, YAML::Node n) {
    if (!n.IsSequence()) fail(n, key, "expected a list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      out.push_back(to_integer(n[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  // Either an explicit list or a {start, stop, step} range.
  std::vector<double> grid(const std::string& key) {
    YAML::Node n = require(key);
    std::vector<double> out;
    if (n.IsMap()) {
      Section range = child(key);
      const double start = range.number("start");
      const double stop = range.number("stop");
      const double step = range.number("step");
      range.finish();
      if (!(step > 0.0) || !(stop >= start)) {
        fail(n, key, "range needs step > 0 and stop >= start");
      }
      out = range_grid(start, stop, step);
    } else {
      out = numbers(key, n);
    }
    if (out.empty()) fail(n, key, "grid is empty");
    return out;
  }

  Section child(const std::string& key) {
    YAML::Node n = require(key);
    if (!n.IsMap()) fail(n, key, "expected a mapping");
    return Section(n, dotted(key), source_);
  }

  std::optional<Section> optional_child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!seen_.count(key)) fail(it->first, key, "unknown field");
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& key,
                         const std::string& message) const {
    const YAML::Mark mark = at ? at.Mark() : node_.Mark();
    std::string field = dotted(key);
    throw ConfigError(location(source_, mark) + ": " + (field.empty() ? "" : field + ": ")
                      + message);
  }

  // Core-library validation failures, reported against this section.
  [[noreturn]] void reject(const std::string& message) const { fail(node_, "", message); }

  std::string dotted(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string scalar(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key, "expected a scalar value");
    return n.Scalar();
  }

  double to_number(const YAML::Node& n, const std::string& key) const {
    const std::string text = scalar(n, key);
    double value = 0.0;
    try {
      value = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, key, "expected a number, got '" + text + "'");
    }
    if (!std::isfinite(value)) fail(n, key, "expected a finite number, got '" + text + "'");
    return value;
  }

  int to_integer(const YAML::Node& n, const std::string& key) const {
    const std::string text = scalar(n, key);
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
      fail(n, key, "expected an integer, got '" + text + "'");
    }
    return value;
  }

  YAML::Node node_;
  std::string path_;
  std::string_view source_;
  std::set<std::string> seen_;
};

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.begin(), v.end())); }

// A scalar broadcasts to length m; a list must have exactly m entries.
Eigen::VectorXd per_cause(Section& s, const std::string& key, int m) {
  YAML::Node n = s.require(key);
  if (n.IsSequence()) {
    const std::vector<double> values = s.numbers(key, n);
    if (static_cast<int>(values.size()) != m) {
      s.fail(n, key, "expected " + std::to_string(m) + " entries, got "
                         + std::to_string(values.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), m);
  }
  return Eigen::VectorXd::Constant(m, s.number(key));
}

linear::StructuralParams parse_linear_model(Section s, json& echo) {
  const int m = s.integer("m");
  if (m < 1) s.fail(s.get("m"), "m", "must be >= 1");
  linear::StructuralParams p;
  p.alpha = per_cause(s, "alpha", m);
  p.beta = per_cause(s, "beta", m);
  p.sigma2_a = per_cause(s, "sigma2_a", m);
  p.gamma = s.number("gamma");
  p.sigma2_u = s.number("sigma2_u");
  p.sigma2_y = s.number("sigma2_y");
  s.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    s.reject(e.what());
  }
  echo = {{"m", m},
          {"alpha", vector_json(p.alpha)},
          {"beta", vector_json(p.beta)},
          {"gamma", p.gamma},
          {"sigma2_u", p.sigma2_u},
          {"sigma2_a", vector_json(p.sigma2_a)},
          {"sigma2_y", p.sigma2_y}};
  return p;
}

struct BinaryDefaults {
  double p_a0;
  double p_a1;
};

binary::BinaryParams parse_binary_model(Section s, BinaryDefaults defaults, json& echo) {
  binary::BinaryParams p;
  p.m = s.integer("m", 6);
  p.pi_u = s.number("pi_u", 0.3);
  p.p_a0 = s.number("p_a0", defaults.p_a0);
  p.p_a1 = s.number("p_a1", defaults.p_a1);
  if (p.m < 1) s.fail(s.get("m"), "m", "must be >= 1");
  echo = {{"m", p.m}, {"pi_u", p.pi_u}, {"p_a0", p.p_a0}, {"p_a1", p.p_a1}};

  if (s.has("p_y")) {
    if (s.has("outcome")) s.fail(s.get("outcome"), "outcome", "give either outcome or p_y, not both");
    Section py = s.child("p_y");
    const std::size_t levels = static_cast<std::size_t>(p.m) + 1;
    p.p_y.clear();
    for (const char* key : {"u0", "u1"}) {
      YAML::Node n = py.require(key);
      const std::vector<double> row = py.numbers(key, n);
      if (row.size() != levels) {
        py.fail(n, key, "expected m+1 = " + std::to_string(levels) + " entries");
      }
      p.p_y.insert(p.p_y.end(), row.begin(), row.end());
    }
    py.finish();
    echo["p_y"] = {{"u0", std::vector<double>(p.p_y.begin(), p.p_y.begin() + levels)},
                   {"u1", std::vector<double>(p.p_y.begin() + levels, p.p_y.end())}};
  }
  double kappa = 0.5, eta = 2.0;
  const bool logistic = p.p_y.empty();
  if (logistic) {
    if (auto outcome = s.optional_child("outcome")) {
      kappa = outcome->number("kappa", kappa);
      eta = outcome->number("eta", eta);
      outcome->finish();
    }
    echo["outcome"] = {{"kappa", kappa}, {"eta", eta}};
  }
  s.finish();
  try {
    if (logistic) {
      p = binary::BinaryParams::with_logistic_outcome(p.m, p.pi_u, p.p_a0, p.p_a1, kappa, eta);
    }
    p.validate();
  } catch (const std::invalid_argument& e) {
    s.reject(e.what());
  }
  return p;
}

LinearConfig parse_linear(Section& root, json& echo) {
  LinearConfig c;
  c.model = parse_linear_model(root.child("model"), echo["model"]);
  c.c_grid = root.grid("c_grid");
  for (double v : c.c_grid) {
    if (!(v > 0.0)) root.fail(root.get("c_grid"), "c_grid", "every c must be > 0");
  }
  echo["c_grid"] = c.c_grid;
  return c;
}

BinaryConfig parse_binary(Section& root, json& echo) {
  BinaryConfig c;
  c.model = parse_binary_model(root.child("model"), {0.1, 0.9}, echo["model"]);
  if (root.has("s_values")) {
    YAML::Node n = root.get("s_values");
    c.s_values = root.integers("s_values", n);
    if (c.s_values.empty()) root.fail(n, "s_values", "grid is empty");
    for (int s : c.s_values) {
      if (s < 0 || s > c.model.m) root.fail(n, "s_values", "entries must lie in 0..m");
    }
  } else {
    for (int s = 0; s <= c.model.m; ++s) c.s_values.push_back(s);
  }
  echo["s_values"] = c.s_values;
  return c;
}

EstimateConfig parse_estimate(Section& root, json& echo) {
  EstimateConfig c;
  c.model = parse_binary_model(root.child("model"), {0.3, 0.7}, echo["model"]);
  c.n = root.integer("n", 15000);
  c.replications = root.integer("replications", 20);
  if (c.n < 1) root.fail(root.get("n"), "n", "must be >= 1");
  if (c.replications < 1) root.fail(root.get("replications"), "replications", "must be >= 1");

  if (auto proxies = root.optional_child("proxies")) {
    for (const char* key : {"p_z1", "p_z2"}) {
      if (!proxies->has(key)) continue;
      YAML::Node n = proxies->get(key);
      const std::vector<double> v = proxies->numbers(key, n);
      if (v.size() != 2) proxies->fail(n, key, "expected [p(z=1|u=0), p(z=1|u=1)]");
      (std::string_view(key) == "p_z1" ? c.proxies.p_z1 : c.proxies.p_z2) = {v[0], v[1]};
    }
    proxies->finish();
    try {
      c.proxies.validate();
    } catch (const std::invalid_argument& e) {
      proxies->reject(e.what());
    }
  }
  echo["proxies"] = {{"p_z1", c.proxies.p_z1}, {"p_z2", c.proxies.p_z2}};

  c.settings = {"standard", "proxy"};
  if (root.has("settings")) {
    YAML::Node n = root.get("settings");
    if (!n.IsSequence() || n.size() == 0) root.fail(n, "settings", "expected a nonempty list");
    c.settings.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string name = n[i].IsScalar() ? n[i].Scalar() : "";
      if (name != "standard" && name != "proxy") {
        root.fail(n[i], "settings", "unknown setting '" + name + "' (standard, proxy)");
      }
      if (std::find(c.settings.begin(), c.settings.end(), name) != c.settings.end()) {
        root.fail(n[i], "settings", "duplicate setting '" + name + "'");
      }
      c.settings.push_back(name);
    }
  }
  echo["settings"] = c.settings;

  Section fit = root.child("fit");
  c.gamma_targets = fit.grid("gamma_targets");
  c.fit.lambda = fit.number("lambda", c.fit.lambda);
  c.fit.max_iters = fit.integer("max_iters", c.fit.max_iters);
  c.fit.step_size = fit.number("step_size", c.fit.step_size);
  c.fit.tol = fit.number("tol", c.fit.tol);
  c.fit.restarts = fit.integer("restarts", c.fit.restarts);
  if (fit.has("target_a")) {
    YAML::Node n = fit.get("target_a");
    const std::vector<int> bits = fit.integers("target_a", n);
    c.fit.target_a.assign(bits.begin(), bits.end());
    for (int b : bits) {
      if (b != 0 && b != 1) fit.fail(n, "target_a", "entries must be 0 or 1");
    }
  } else {
    // default: every cause on except the last
    c.fit.target_a.assign(static_cast<std::size_t>(c.model.m), 1);
    c.fit.target_a.back() = 0;
  }
  if (static_cast<int>(c.fit.target_a.size()) != c.model.m) {
    fit.fail(fit.get("target_a"), "target_a", "expected m = " + std::to_string(c.model.m) + " bits");
  }
  fit.finish();
  try {
    c.fit.validate();
  } catch (const std::invalid_argument& e) {
    fit.reject(e.what());
  }
  echo["fit"] = {{"gamma_targets", c.gamma_targets},
                 {"lambda", c.fit.lambda},
                 {"target_a", c.fit.target_a},
                 {"max_iters", c.fit.max_iters},
                 {"step_size", c.fit.step_size},
                 {"tol", c.fit.tol},
                 {"restarts", c.fit.restarts}};
  echo["n"] = c.n;
  echo["replications"] = c.replications;
  return c;
}

PositivityConfig parse_positivity(Section& root, json& echo) {
  PositivityConfig c;
  {
    // m comes from m_values; reject it here so nobody expects it to matter
    Section model = root.child("model");
    if (model.has("m")) model.fail(model.get("m"), "m", "set m_values instead");
    c.model.pi_u = model.number("pi_u", 0.3);
    c.model.p_a0 = model.number("p_a0", 0.1);
    c.model.p_a1 = model.number("p_a1", 0.9);
    model.finish();
    c.model.m = 1;
    c.model.p_y.assign(4, 0.5);
    try {
      c.model.validate();
    } catch (const std::invalid_argument& e) {
      model.reject(e.what());
    }
    echo["model"] = {{"pi_u", c.model.pi_u}, {"p_a0", c.model.p_a0}, {"p_a1", c.model.p_a1}};
  }
  YAML::Node mv = root.require("m_values");
  c.m_values = root.integers("m_values", mv);
  if (c.m_values.empty()) root.fail(mv, "m_values", "grid is empty");
  for (std::size_t i = 0; i < c.m_values.size(); ++i) {
    const int m = c.m_values[i];
    if (m < 2 || m % 2 != 0) {
      root.fail(mv[i], "m_values", "m=" + std::to_string(m) + " must be even and >= 2");
    }
  }
  c.n = root.integer("n", 500);
  c.rate_samples = root.integer("rate_samples", 100000);
  if (c.n < 1) root.fail(root.get("n"), "n", "must be >= 1");
  if (c.rate_samples < 1) root.fail(root.get("rate_samples"), "rate_samples", "must be >= 1");
  echo["m_values"] = c.m_values;
  echo["n"] = c.n;
  echo["rate_samples"] = c.rate_samples;
  return c;
}

}  // namespace

std::string_view experiment_name(Experiment e) { return kNames[static_cast<int>(e)]; }

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kNames[i] == name) return static_cast<Experiment>(i);
  }
  return std::nullopt;
}

std::vector<double> range_grid(double start, double stop, double step) {
  const double span = (stop - start) / step;
  const auto count = static_cast<long long>(std::floor(span + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  char buf[32];
  for (long long i = 0; i < count; ++i) {
    const double raw = start + static_cast<double>(i) * step;
    const auto res = std::to_chars(buf, buf + sizeof buf, raw, std::chars_format::general, 12);
    double snapped = raw;
    std::from_chars(buf, res.ptr, snapped);
    out.push_back(snapped);
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text, Experiment expected, std::string_view source) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(location(source, e.mark) + ": " + e.msg);
  }
  if (!doc || doc.IsNull()) throw ConfigError(std::string(source) + ": config is empty");

  Section root(doc, "", source);
  ExperimentConfig config;
  config.experiment = expected;
  if (root.has("experiment")) {
    YAML::Node n = root.get("experiment");
    const std::string name = n.IsScalar() ? n.Scalar() : "";
    const auto parsed = parse_experiment(name);
    if (!parsed) root.fail(n, "experiment", "unknown experiment '" + name + "'");
    if (*parsed != expected) {
      root.fail(n, "experiment",
                "config is for '" + name + "' but the subcommand is '"
                    + std::string(experiment_name(expected)) + "'");
    }
  }
  config.seed = root.seed("seed");

  json echo;
  echo["experiment"] = experiment_name(expected);
  echo["seed"] = config.seed;
  switch (expected) {
    case Experiment::kLinearIgnorance: config.body = parse_linear(root, echo); break;
    case Experiment::kBinaryIgnorance: config.body = parse_binary(root, echo); break;
    case Experiment::kEstimate: config.body = parse_estimate(root, echo); break;
    case Experiment::kPositivity: config.body = parse_positivity(root, echo); break;
  }
  root.finish();
  config.resolved_json = echo.dump();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, Experiment expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), expected, path.string());
}

}  // namespace mcid::harness
