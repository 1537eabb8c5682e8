#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace viamon {

namespace {

double round12(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  return std::stod(fmt::format("{:.12g}", v));
}

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& what) const {
    const auto mark = node.IsDefined() ? node.Mark() : YAML::Mark::null_mark();
    if (mark.line >= 0) {
      throw ConfigError(fmt::format("{}:{}:{}: {}: {}", origin_, mark.line + 1, mark.column + 1,
                                    field, what));
    }
    throw ConfigError(fmt::format("{}: {}: {}", origin_, field, what));
  }

  void expect_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
  }

  void only_keys(const YAML::Node& node, const std::string& section,
                 std::initializer_list<const char*> allowed) const {
    expect_map(node, section);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                  [&](const char* a) { return key == a; });
      if (!ok) {
        fail(kv.first, section.empty() ? key : section + "." + key, "unknown key");
      }
    }
  }

  template <typename T>
  T get(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar value");
    try {
      return node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node, field, fmt::format("cannot read '{}' as {}", node.Scalar(), type_name<T>()));
    }
  }

  template <typename T>
  void maybe(const YAML::Node& parent, const char* key, const std::string& section, T& out) const {
    const auto node = parent[key];
    if (node) out = get<T>(node, section + "." + key);
  }

  double probability(const YAML::Node& node, const std::string& field) const {
    const double v = get<double>(node, field);
    if (!(v >= 0.0 && v <= 1.0)) fail(node, field, "must lie in [0, 1]");
    return v;
  }

 private:
  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    else if constexpr (std::is_same_v<T, bool>) return "true/false";
    else if constexpr (std::is_integral_v<T>) return "a non-negative integer";
    else return "text";
  }

  std::string origin_;
};

Range read_range(const Reader& r, const YAML::Node& node, const std::string& field) {
  r.only_keys(node, field, {"min", "max", "step"});
  Range out;
  for (const char* key : {"min", "max", "step"}) {
    if (!node[key]) r.fail(node, field + "." + key, "missing");
  }
  out.min = r.probability(node["min"], field + ".min");
  out.max = r.probability(node["max"], field + ".max");
  out.step = r.get<double>(node["step"], field + ".step");
  if (!(out.step > 0.0)) r.fail(node["step"], field + ".step", "must be positive");
  return out;
}

PolicyEntry read_policy(const Reader& r, const YAML::Node& node, const std::string& field) {
  r.only_keys(node, field, {"kind", "p_sample", "label"});
  if (!node["kind"]) r.fail(node, field + ".kind", "missing");
  const auto name = r.get<std::string>(node["kind"], field + ".kind");
  const auto kind = via::parse_policy_kind(name);
  if (!kind) {
    r.fail(node["kind"], field + ".kind",
           "unknown policy '" + name + "' (randomized_stationary, change_aware, semantics_aware)");
  }
  const bool has_ps = static_cast<bool>(node["p_sample"]);
  auto policy = via::PolicySpec::change_aware();
  std::string label;
  switch (*kind) {
    case via::PolicyKind::RandomizedStationary:
      if (!has_ps) r.fail(node, field + ".p_sample", "required for randomized_stationary");
      policy = via::PolicySpec::randomized_stationary(
          r.probability(node["p_sample"], field + ".p_sample"));
      label = "rs";
      break;
    case via::PolicyKind::ChangeAware:
      label = "ca";
      break;
    case via::PolicyKind::SemanticsAware:
      policy = via::PolicySpec::semantics_aware();
      label = "sa";
      break;
  }
  if (has_ps && *kind != via::PolicyKind::RandomizedStationary) {
    r.fail(node["p_sample"], field + ".p_sample", "only randomized_stationary takes p_sample");
  }
  if (node["label"]) {
    label = r.get<std::string>(node["label"], field + ".label");
    const bool clean = !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
    if (!clean) r.fail(node["label"], field + ".label", "use letters, digits and '_' only");
  }
  return {label, policy};
}

}  // namespace

std::vector<double> Range::values() const {
  std::vector<double> out;
  if (min > max + 1e-12) return out;
  const auto n = static_cast<long long>(std::floor((max - min) / step + 1e-9));
  for (long long k = 0; k <= n; ++k) out.push_back(round12(min + static_cast<double>(k) * step));
  return out;
}

std::string to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Both: return "both";
  }
  return "both";
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}:{}: syntax error: {}", origin, e.mark.line + 1,
                                  e.mark.column + 1, e.msg));
  }
  Reader r(origin);
  ExperimentConfig cfg;
  cfg.origin = origin;
  if (!root || root.IsNull()) throw ConfigError(origin + ": empty configuration");
  r.only_keys(root, "", {"grid", "policies", "simulation", "optimization", "validation", "output"});

  if (const auto grid = root["grid"]) {
    r.only_keys(grid, "grid", {"p", "q", "p_s"});
    if (grid["p"]) cfg.p = read_range(r, grid["p"], "grid.p");
    if (grid["q"]) cfg.q = read_range(r, grid["q"], "grid.q");
    if (const auto ps = grid["p_s"]) {
      if (!ps.IsSequence()) r.fail(ps, "grid.p_s", "expected a list of probabilities");
      cfg.p_s.clear();
      for (std::size_t i = 0; i < ps.size(); ++i) {
        cfg.p_s.push_back(r.probability(ps[i], fmt::format("grid.p_s[{}]", i)));
      }
    }
  }

  if (const auto pol = root["policies"]) {
    if (!pol.IsSequence()) r.fail(pol, "policies", "expected a list");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < pol.size(); ++i) {
      const auto field = fmt::format("policies[{}]", i);
      auto entry = read_policy(r, pol[i], field);
      if (!seen.insert(entry.label).second) {
        r.fail(pol[i], field + ".label", "duplicate label '" + entry.label + "'");
      }
      cfg.policies.push_back(std::move(entry));
    }
  } else {
    cfg.policies = {{"rs", via::PolicySpec::randomized_stationary(0.5)},
                    {"ca", via::PolicySpec::change_aware()},
                    {"sa", via::PolicySpec::semantics_aware()}};
  }
  if (cfg.policies.empty()) throw ConfigError(origin + ": policies: list is empty");

  if (const auto sim = root["simulation"]) {
    r.only_keys(sim, "simulation",
                {"enabled", "slots", "burn_in", "seed", "reps", "histogram_cap"});
    auto& s = cfg.simulation;
    r.maybe(sim, "enabled", "simulation", s.enabled);
    r.maybe(sim, "slots", "simulation", s.slots);
    r.maybe(sim, "burn_in", "simulation", s.burn_in);
    r.maybe(sim, "seed", "simulation", s.seed);
    r.maybe(sim, "reps", "simulation", s.reps);
    r.maybe(sim, "histogram_cap", "simulation", s.histogram_cap);
    if (s.burn_in >= s.slots) r.fail(sim, "simulation.burn_in", "must be smaller than slots");
    if (s.reps < 1) r.fail(sim["reps"], "simulation.reps", "must be at least 1");
    if (s.histogram_cap < 1) r.fail(sim["histogram_cap"], "simulation.histogram_cap", "must be at least 1");
  }

  if (const auto opt = root["optimization"]) {
    r.only_keys(opt, "optimization", {"eta", "e_max", "delta", "grid_step"});
    auto& o = cfg.optimization;
    if (opt["eta"]) o.eta = r.probability(opt["eta"], "optimization.eta");
    if (opt["e_max"]) o.e_max = r.probability(opt["e_max"], "optimization.e_max");
    r.maybe(opt, "delta", "optimization", o.delta);
    r.maybe(opt, "grid_step", "optimization", o.grid_step);
    if (!(o.e_max > 0.0)) r.fail(opt["e_max"], "optimization.e_max", "must be positive");
    if (!(o.delta > 0.0)) r.fail(opt["delta"], "optimization.delta", "must be positive");
    if (!(o.grid_step >= 0.0 && o.grid_step <= 0.01)) {
      r.fail(opt["grid_step"], "optimization.grid_step", "must lie in (0, 0.01], or 0 to skip");
    }
  }

  if (const auto val = root["validation"]) {
    r.only_keys(val, "validation",
                {"oracle_tolerance", "small_chain_tolerance", "mc_rel_tolerance",
                 "mc_stderr_factor", "truncation", "pmf_levels", "perturb"});
    auto& v = cfg.validation;
    r.maybe(val, "oracle_tolerance", "validation", v.oracle_tolerance);
    r.maybe(val, "small_chain_tolerance", "validation", v.small_chain_tolerance);
    r.maybe(val, "mc_rel_tolerance", "validation", v.mc_rel_tolerance);
    r.maybe(val, "mc_stderr_factor", "validation", v.mc_stderr_factor);
    r.maybe(val, "truncation", "validation", v.truncation);
    r.maybe(val, "pmf_levels", "validation", v.pmf_levels);
    r.maybe(val, "perturb", "validation", v.perturb);
    if (v.truncation < 2) r.fail(val["truncation"], "validation.truncation", "must be at least 2");
    if (v.pmf_levels >= v.truncation) {
      r.fail(val, "validation.pmf_levels", "must be smaller than truncation");
    }
  }

  if (const auto out = root["output"]) {
    r.only_keys(out, "output", {"dir", "format", "name"});
    auto& o = cfg.output;
    r.maybe(out, "dir", "output", o.dir);
    r.maybe(out, "name", "output", o.name);
    if (out["format"]) {
      const auto f = r.get<std::string>(out["format"], "output.format");
      if (f == "csv") o.format = OutputFormat::Csv;
      else if (f == "json") o.format = OutputFormat::Json;
      else if (f == "both") o.format = OutputFormat::Both;
      else r.fail(out["format"], "output.format", "expected csv, json or both");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace viamon
