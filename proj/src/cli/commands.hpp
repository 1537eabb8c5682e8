#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace viamon {

struct GridCell {
  double p;
  double q;
  double p_s;
  std::size_t ip;
  std::size_t iq;
  std::size_t is;
};

/// Cells in (p, q, p_s) order, p outermost.
std::vector<GridCell> grid_cells(const ExperimentConfig& cfg);

/// Seed of the trajectory for one (cell, policy) pair; independent of the
/// order cells are processed in.
std::uint64_t cell_seed(std::uint64_t seed, const GridCell& cell, std::size_t policy_index);

struct ValidationReport {
  Table table;
  std::size_t comparisons = 0;
  std::size_t failures = 0;
  std::size_t skipped_cells = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> failed;  // one line per failing comparison
};

ValidationReport validate_grid(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs);
Table sweep_table(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs);
Table optimize_table(const ExperimentConfig& cfg, std::size_t jobs);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

/// Exit codes: 0 success, 1 validation failure, 2 configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConfig = 2;

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace viamon
