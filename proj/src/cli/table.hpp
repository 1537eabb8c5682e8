#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace viamon {

/// Empty cells are std::monostate: CSV writes nothing, JSON writes null.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

/// 12 significant digits, '.' separator, "nan"/"inf"/"-inf" for non-finite.
std::string format_number(double v);

/// Column-ordered table; rows are addressed by column name while being
/// filled so a misspelt column is caught immediately.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t column(const std::string& name) const;

  class Row {
   public:
    Row& set(const std::string& name, Cell value);
    Row& set(const std::string& name, double value) { return set(name, Cell(value)); }
    Row& set(const std::string& name, std::string value) { return set(name, Cell(std::move(value))); }
    Row& set(const std::string& name, std::optional<double> value);

   private:
    friend class Table;
    Row(const Table* t) : table_(t), cells_(t->columns_.size()) {}
    const Table* table_;
    std::vector<Cell> cells_;
  };

  Row row() const { return Row(this); }
  void push(Row row) { rows_.push_back(std::move(row.cells_)); }
  void append(const Table& other);

  std::string to_csv() const;
  nlohmann::ordered_json rows_json() const;

 private:
  std::vector<std::string> columns_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<Cell>> rows_;
};

struct RunMetadata {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json tolerances = nlohmann::ordered_json::object();
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

std::string git_describe();

/// Writes <stem>.csv and/or <stem>.json under `dir` per `format`. The JSON
/// file always carries the metadata; it carries the rows unless the format
/// is csv-only. Returns the paths written.
std::vector<std::filesystem::path> write_outputs(const Table& table, const RunMetadata& meta,
                                                 const ExperimentConfig& cfg,
                                                 const std::filesystem::path& dir,
                                                 const std::string& stem);

nlohmann::ordered_json config_json(const ExperimentConfig& cfg);

}  // namespace viamon
