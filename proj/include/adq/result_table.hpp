#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace adq {

enum class ColumnType { real, integer, text };

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
  ColumnType type = ColumnType::real;
};

using Cell = std::variant<double, std::int64_t, std::string>;

inline constexpr int result_schema_version = 1;

/// Rectangular, typed table plus a metadata object. Keys named "timestamp" or
/// "runtime_seconds" in the metadata are the only non-reproducible content.
struct ResultTable {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double real_at(std::size_t row, const std::string& column) const;

  bool operator==(const ResultTable& o) const;
};

enum class Format { csv, json };

Format format_from_path(const std::string& path);

std::string to_csv(const ResultTable& t);
nlohmann::ordered_json to_json(const ResultTable& t);

ResultTable from_csv(const std::string& text);
ResultTable from_json(const nlohmann::ordered_json& j);

/// CSV writes the table to path and the metadata to path + ".meta.json".
void emit(const ResultTable& t, const std::string& path, Format f);
ResultTable read_back(const std::string& path, Format f);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::ordered_json& cfg);

} // namespace adq
