#include "adq/result_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adq/errors.hpp"

namespace adq {

namespace {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const char* type_name(ColumnType t) {
  switch (t) {
    case ColumnType::real: return "real";
    case ColumnType::integer: return "integer";
    case ColumnType::text: return "text";
  }
  return "real";
}

ColumnType type_from_name(const std::string& s) {
  if (s == "real") return ColumnType::real;
  if (s == "integer") return ColumnType::integer;
  if (s == "text") return ColumnType::text;
  throw ConfigError("unknown column type '" + s + "'");
}

bool cell_matches(const Cell& c, ColumnType t) {
  switch (t) {
    case ColumnType::real: return std::holds_alternative<double>(c);
    case ColumnType::integer: return std::holds_alternative<std::int64_t>(c);
    case ColumnType::text: return std::holds_alternative<std::string>(c);
  }
  return false;
}

std::string cell_text(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return format_real(*d);
  if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_escape(std::get<std::string>(c));
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return std::stod(s);
}

bool looks_integer(const std::string& s) {
  if (s.empty()) return false;
  std::size_t k = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (k == s.size()) return false;
  for (; k < s.size(); ++k)
    if (s[k] < '0' || s[k] > '9') return false;
  return true;
}

bool looks_real(const std::string& s) {
  if (s == "nan" || s == "inf" || s == "-inf") return true;
  if (s.find_first_of(".eE") == std::string::npos) return false;
  try {
    std::size_t pos = 0;
    std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

nlohmann::ordered_json cell_json(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) {
    if (std::isfinite(*d)) return *d;
    return format_real(*d);  // JSON has no inf/nan literal
  }
  if (auto i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

} // namespace

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw ConfigError("ResultTable: row width does not match columns");
  for (std::size_t k = 0; k < row.size(); ++k)
    if (!cell_matches(row[k], columns[k].type))
      throw ConfigError("ResultTable: cell type mismatch in column '" + columns[k].name + "'");
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k].name == name) return k;
  throw ConfigError("ResultTable: no column '" + name + "'");
}

double ResultTable::real_at(std::size_t row, const std::string& column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (auto d = std::get_if<double>(&c)) return *d;
  if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw ConfigError("ResultTable: column '" + column + "' is not numeric");
}

bool ResultTable::operator==(const ResultTable& o) const {
  if (columns.size() != o.columns.size() || rows.size() != o.rows.size()) return false;
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k].name != o.columns[k].name || columns[k].unit != o.columns[k].unit ||
        columns[k].type != o.columns[k].type)
      return false;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const Cell &a = rows[r][k], &b = o.rows[r][k];
      if (a.index() != b.index()) return false;
      if (auto x = std::get_if<double>(&a)) {
        const double y = std::get<double>(b);
        if (!(*x == y || (std::isnan(*x) && std::isnan(y)))) return false;
      } else if (a != b) {
        return false;
      }
    }
  return metadata == o.metadata;
}

Format format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "csv") return Format::csv;
  if (ext == "json") return Format::json;
  throw ConfigError("cannot infer output format from '" + path + "' (use .csv or .json)");
}

std::string to_csv(const ResultTable& t) {
  std::ostringstream os;
  for (std::size_t k = 0; k < t.columns.size(); ++k)
    os << (k ? "," : "") << csv_escape(t.columns[k].name + " (" + t.columns[k].unit + ")");
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << cell_text(row[k]);
    os << "\n";
  }
  return os.str();
}

nlohmann::ordered_json to_json(const ResultTable& t) {
  nlohmann::ordered_json j;
  j["schema_version"] = result_schema_version;
  j["metadata"] = t.metadata;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : t.columns) j["columns"].push_back({{"name", c.name}, {"unit", c.unit}, {"type", type_name(c.type)}});
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    j["rows"].push_back(std::move(r));
  }
  return j;
}

ResultTable from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  ResultTable t;
  if (!std::getline(is, line)) throw ConfigError("from_csv: missing header");
  for (const auto& h : csv_split(line)) {
    const auto open = h.rfind(" (");
    if (open == std::string::npos || h.back() != ')') throw ConfigError("from_csv: header '" + h + "' lacks a unit");
    t.columns.push_back({h.substr(0, open), h.substr(open + 2, h.size() - open - 3), ColumnType::text});
  }
  std::vector<std::vector<std::string>> raw;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = csv_split(line);
    if (cells.size() != t.columns.size()) throw ConfigError("from_csv: ragged row");
    raw.push_back(std::move(cells));
  }
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    bool all_int = !raw.empty(), all_real = !raw.empty();
    for (const auto& r : raw) {
      all_int = all_int && looks_integer(r[k]);
      all_real = all_real && looks_real(r[k]);
    }
    t.columns[k].type = all_int ? ColumnType::integer : all_real ? ColumnType::real : ColumnType::text;
  }
  for (const auto& r : raw) {
    std::vector<Cell> row;
    for (std::size_t k = 0; k < r.size(); ++k) {
      switch (t.columns[k].type) {
        case ColumnType::integer: row.emplace_back(static_cast<std::int64_t>(std::stoll(r[k]))); break;
        case ColumnType::real: row.emplace_back(parse_real(r[k])); break;
        case ColumnType::text: row.emplace_back(r[k]); break;
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ResultTable from_json(const nlohmann::ordered_json& j) {
  if (j.value("schema_version", 0) != result_schema_version) throw ConfigError("from_json: unsupported schema version");
  ResultTable t;
  t.metadata = j.at("metadata");
  for (const auto& c : j.at("columns"))
    t.columns.push_back({c.at("name").get<std::string>(), c.at("unit").get<std::string>(),
                         type_from_name(c.at("type").get<std::string>())});
  for (const auto& r : j.at("rows")) {
    std::vector<Cell> row;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const auto& v = r[k];
      switch (t.columns.at(k).type) {
        case ColumnType::real: row.emplace_back(v.is_string() ? parse_real(v.get<std::string>()) : v.get<double>()); break;
        case ColumnType::integer: row.emplace_back(v.get<std::int64_t>()); break;
        case ColumnType::text: row.emplace_back(v.get<std::string>()); break;
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {
void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}
} // namespace

void emit(const ResultTable& t, const std::string& path, Format f) {
  if (f == Format::json) {
    write_file(path, to_json(t).dump(2) + "\n");
  } else {
    write_file(path, to_csv(t));
    nlohmann::ordered_json meta;
    meta["schema_version"] = result_schema_version;
    meta["metadata"] = t.metadata;
    meta["columns"] = to_json(ResultTable{t.columns, {}, {}}).at("columns");
    write_file(path + ".meta.json", meta.dump(2) + "\n");
  }
}

ResultTable read_back(const std::string& path, Format f) {
  if (f == Format::json) return from_json(nlohmann::ordered_json::parse(read_file(path)));
  const auto meta = nlohmann::ordered_json::parse(read_file(path + ".meta.json"));
  ResultTable schema = from_json({{"schema_version", meta.at("schema_version")},
                                  {"metadata", meta.at("metadata")},
                                  {"columns", meta.at("columns")},
                                  {"rows", nlohmann::ordered_json::array()}});
  const std::string text = read_file(path);
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = csv_split(line);
    if (cells.size() != schema.columns.size()) throw ConfigError("read_back: ragged row");
    std::vector<Cell> row;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      switch (schema.columns[k].type) {
        case ColumnType::integer: row.emplace_back(static_cast<std::int64_t>(std::stoll(cells[k]))); break;
        case ColumnType::real: row.emplace_back(parse_real(cells[k])); break;
        case ColumnType::text: row.emplace_back(cells[k]); break;
      }
    }
    schema.rows.push_back(std::move(row));
  }
  if (from_csv(text).columns.size() != schema.columns.size()) throw ConfigError("read_back: header does not match schema");
  return schema;
}

std::string config_hash(const nlohmann::ordered_json& cfg) {
  const std::string s = cfg.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace adq
