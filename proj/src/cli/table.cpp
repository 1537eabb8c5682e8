#include "table.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#ifndef VIA_GIT_DESCRIBE
#define VIA_GIT_DESCRIBE "unknown"
#endif

namespace viamon {

namespace {

constexpr int kSchemaVersion = 1;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
  } visit;
  return std::visit(visit, c);
}

// Numbers pass through their 12-digit text so the JSON value is exactly the
// value a CSV reader recovers.
nlohmann::ordered_json cell_json(const Cell& c) {
  struct {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_number(v);
      return std::stod(format_number(v));
    }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(const std::string& v) const { return v; }
  } visit;
  return std::visit(visit, c);
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << body;
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  return fmt::format("{:.12g}", v);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (!index_.emplace(columns_[i], i).second) {
      throw std::logic_error("duplicate column " + columns_[i]);
    }
  }
}

std::size_t Table::column(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::logic_error("no column named " + name);
  return it->second;
}

Table::Row& Table::Row::set(const std::string& name, Cell value) {
  cells_[table_->column(name)] = std::move(value);
  return *this;
}

Table::Row& Table::Row::set(const std::string& name, std::optional<double> value) {
  if (value) return set(name, Cell(*value));
  return set(name, Cell(std::monostate{}));
}

void Table::append(const Table& other) {
  if (other.columns_ != columns_) throw std::logic_error("column mismatch");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += csv_field(columns_[i]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cell_text(row[i]));
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json Table::rows_json() const {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[columns_[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

std::string git_describe() { return VIA_GIT_DESCRIBE; }

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  auto range = [](const Range& r) {
    return nlohmann::ordered_json{{"min", r.min}, {"max", r.max}, {"step", r.step}};
  };
  auto policies = nlohmann::ordered_json::array();
  for (const auto& p : cfg.policies) {
    nlohmann::ordered_json e{{"label", p.label}, {"kind", std::string(via::to_string(p.spec.kind()))}};
    if (p.spec.p_sample()) e["p_sample"] = *p.spec.p_sample();
    policies.push_back(std::move(e));
  }
  const auto& s = cfg.simulation;
  const auto& o = cfg.optimization;
  return {
      {"grid", {{"p", range(cfg.p)}, {"q", range(cfg.q)}, {"p_s", cfg.p_s}}},
      {"policies", policies},
      {"simulation",
       {{"enabled", s.enabled}, {"slots", s.slots}, {"burn_in", s.burn_in}, {"reps", s.reps},
        {"histogram_cap", s.histogram_cap}}},
      {"optimization",
       {{"eta", o.eta}, {"e_max", o.e_max}, {"delta", o.delta}, {"grid_step", o.grid_step}}},
  };
}

std::vector<std::filesystem::path> write_outputs(const Table& table, const RunMetadata& meta,
                                                 const ExperimentConfig& cfg,
                                                 const std::filesystem::path& dir,
                                                 const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory " + dir.string() + " is not writable");
  }
  std::vector<std::filesystem::path> written;
  const auto format = cfg.output.format;
  if (format != OutputFormat::Json) {
    const auto path = dir / (stem + ".csv");
    write_file(path, table.to_csv());
    written.push_back(path);
  }
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["tool"] = "viamon";
  doc["command"] = meta.command;
  doc["git_describe"] = git_describe();
  doc["seed"] = meta.seed;
  doc["tolerances"] = meta.tolerances;
  doc["config"] = config_json(cfg);
  for (auto it = meta.extra.begin(); it != meta.extra.end(); ++it) doc[it.key()] = it.value();
  doc["columns"] = table.columns();
  doc["row_count"] = table.rows().size();
  if (format != OutputFormat::Csv) doc["rows"] = table.rows_json();
  const auto path = dir / (stem + ".json");
  write_file(path, doc.dump(2) + "\n");
  written.push_back(path);
  return written;
}

}  // namespace viamon
