#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "via/policies.hpp"

namespace viamon {

/// Bad or unreadable configuration. The message carries the file, line and
/// field when they are known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Range {
  double min = 0.1;
  double max = 0.5;
  double step = 0.1;

  /// min, min + step, ... up to max (inclusive, with a small tolerance).
  /// Values are rounded to 12 significant digits so 0.1 + 2 * 0.1 prints
  /// as 0.3.
  std::vector<double> values() const;
};

struct PolicyEntry {
  std::string label;
  via::PolicySpec spec;
};

struct SimulationSettings {
  bool enabled = true;
  std::uint64_t slots = 1'000'000;  // includes burn_in
  std::uint64_t burn_in = 10'000;
  std::uint64_t seed = 1;
  std::size_t reps = 1;
  std::size_t histogram_cap = 64;
};

struct OptimizationSettings {
  double eta = 0.5;
  double e_max = 0.5;
  double delta = 0.1;
  double grid_step = 0.0;  // > 0 adds a brute-force check column to optimize
};

struct ValidationSettings {
  double oracle_tolerance = 1e-9;
  double small_chain_tolerance = 1e-12;
  double mc_rel_tolerance = 0.01;
  double mc_stderr_factor = 3.0;
  std::size_t truncation = 400;
  std::size_t pmf_levels = 50;
  double perturb = 0.0;  // scales every closed-form value; negative control
};

enum class OutputFormat { Csv, Json, Both };

struct OutputSettings {
  std::string dir = "results";
  OutputFormat format = OutputFormat::Both;
  std::string name;  // file stem; defaults to the subcommand name
};

struct ExperimentConfig {
  Range p;
  Range q;
  std::vector<double> p_s{0.3, 0.7};
  std::vector<PolicyEntry> policies;
  SimulationSettings simulation;
  OptimizationSettings optimization;
  ValidationSettings validation;
  OutputSettings output;
  std::string origin;  // file the config came from
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(OutputFormat format);

}  // namespace viamon
