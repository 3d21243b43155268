#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "adq/result_table.hpp"

namespace adq {

inline constexpr const char* code_version = "0.1.0";
inline constexpr int config_schema_version = 1;

struct ExperimentInfo {
  std::string name;
  std::string anchor;  // figure it reproduces
  std::string summary;
  nlohmann::ordered_json defaults;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& name);

/// Parses one "key=value" override. The value is read as JSON first and
/// falls back to a plain string.
std::pair<std::string, nlohmann::ordered_json> parse_assignment(const std::string& text);

/// Defaults, then the "params" object of a config file, then overrides.
/// Unknown keys and type mismatches raise ConfigError.
nlohmann::ordered_json resolve_params(const ExperimentInfo& info, const nlohmann::ordered_json& file_params,
                                      const std::vector<std::string>& overrides);

/// Reads {"schema_version": 1, "experiment": ..., "params": {...}}.
nlohmann::ordered_json load_config_file(const std::string& path);

/// Deterministic in (name, params, seed). Metadata holds the experiment,
/// seed, params echo, config hash and code version; no run block.
ResultTable run_experiment(const std::string& name, const nlohmann::ordered_json& params, std::uint64_t seed);

/// Adds the non-reproducible "run" block (timestamp, runtime_seconds).
void stamp_run(ResultTable& t, double runtime_seconds);

/// Liouvillian spectra are limited to superoperator side <= this.
inline constexpr std::size_t max_superoperator_side = 16384;

} // namespace adq
