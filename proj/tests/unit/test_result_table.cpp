#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adq/errors.hpp"
#include "adq/result_table.hpp"

using namespace adq;

namespace {

ResultTable sample() {
  ResultTable t;
  t.columns = {{"cycle", "cycles", ColumnType::integer},
               {"S_vN", "nat", ColumnType::real},
               {"model", "1", ColumnType::text}};
  t.add_row({std::int64_t{0}, 0.0, std::string("spin")});
  t.add_row({std::int64_t{5}, 1.0 / 3.0, std::string("a,b \"quoted\"")});
  t.add_row({std::int64_t{-2}, std::numeric_limits<double>::infinity(), std::string("x")});
  t.add_row({std::int64_t{7}, 1e-300, std::string("")});
  t.metadata["seed"] = 42;
  t.metadata["config_hash"] = "abc";
  return t;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "adq_result_table_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

} // namespace

TEST_CASE("row typing") {
  auto t = sample();
  CHECK_THROWS_AS(t.add_row({1.0, 2.0, std::string("x")}), ConfigError);
  CHECK_THROWS_AS(t.add_row({std::int64_t{1}, 2.0}), ConfigError);
  CHECK(t.real_at(1, "cycle") == 5.0);
  CHECK(t.real_at(1, "S_vN") == 1.0 / 3.0);
  CHECK_THROWS_AS(t.real_at(0, "model"), ConfigError);
  CHECK_THROWS_AS(t.column_index("nope"), ConfigError);
}

TEST_CASE("CSV layout") {
  const std::string csv = to_csv(sample());
  std::istringstream is(csv);
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  CHECK(header == "cycle (cycles),S_vN (nat),model (1)");
  CHECK(first == "0,0.0,spin");
}

TEST_CASE("empty table gives a header-only CSV") {
  ResultTable t;
  t.columns = {{"t", "1/Gamma", ColumnType::real}, {"n", "1", ColumnType::integer}};
  CHECK(to_csv(t) == "t (1/Gamma),n (1)\n");
  const auto path = scratch("empty.csv").string();
  emit(t, path, Format::csv);
  CHECK(slurp(path) == "t (1/Gamma),n (1)\n");
  const auto back = read_back(path, Format::csv);
  CHECK(back == t);
}

TEST_CASE("round trips") {
  const auto t = sample();
  CHECK(from_json(to_json(t)) == t);
  for (auto f : {Format::csv, Format::json}) {
    const auto path = scratch(f == Format::csv ? "t.csv" : "t.json").string();
    emit(t, path, f);
    const auto back = read_back(path, f);
    CHECK(back == t);
    CHECK(back.metadata["seed"] == 42);
    CHECK(back.metadata["config_hash"] == "abc");
  }
  // CSV alone keeps numbers exactly (type inference without the sidecar)
  const auto inferred = from_csv(to_csv(t));
  CHECK(inferred.columns[0].type == ColumnType::integer);
  CHECK(inferred.columns[1].type == ColumnType::real);
  CHECK(std::get<double>(inferred.rows[1][1]) == 1.0 / 3.0);
  CHECK(std::get<std::string>(inferred.rows[1][2]) == "a,b \"quoted\"");
}

TEST_CASE("JSON carries the schema version") {
  const auto j = to_json(sample());
  CHECK(j["schema_version"] == result_schema_version);
  auto bad = j;
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(from_json(bad), ConfigError);
}

TEST_CASE("format from path") {
  CHECK(format_from_path("out/x.csv") == Format::csv);
  CHECK(format_from_path("x.json") == Format::json);
  CHECK_THROWS_AS(format_from_path("x.txt"), ConfigError);
}

TEST_CASE("config hash") {
  nlohmann::ordered_json a = {{"n", 4}, {"v2", 0.5}};
  nlohmann::ordered_json b = {{"n", 4}, {"v2", 0.5}};
  nlohmann::ordered_json c = {{"n", 4}, {"v2", 0.45}};
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  // FNV-1a 64 of the two bytes "{}", frozen from an independent script
  CHECK(config_hash(nlohmann::ordered_json::object()) == "08f44b07b5901a25");
}
