#include <chrono>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adq/errors.hpp"
#include "adq/experiments.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

int list_experiments() {
  for (const auto& e : adq::experiment_registry()) {
    std::cout << std::left << std::setw(8) << e.name << std::setw(10) << e.anchor << e.summary << "\n";
    std::cout << "        defaults: " << e.defaults.dump() << "\n";
  }
  return 0;
}

int run(const std::string& experiment, std::uint64_t seed, const std::string& out, const std::string& config,
        const std::vector<std::string>& sets) {
  nlohmann::ordered_json file;
  std::string name = experiment;
  if (!config.empty()) {
    file = adq::load_config_file(config);
    if (file.contains("experiment")) {
      const auto from_file = file["experiment"].get<std::string>();
      if (!name.empty() && name != from_file)
        throw adq::ConfigError("--experiment " + name + " disagrees with config file experiment " + from_file);
      name = from_file;
    }
  }
  if (name.empty()) throw adq::ConfigError("no experiment given (--experiment or config file)");
  const auto& info = adq::find_experiment(name);
  const nlohmann::ordered_json file_params = file.is_object() && file.contains("params") ? file["params"] : nullptr;
  const auto params = adq::resolve_params(info, file_params, sets);
  const auto fmt = adq::format_from_path(out);

  const auto t0 = std::chrono::steady_clock::now();
  auto table = adq::run_experiment(name, params, seed);
  adq::stamp_run(table, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  adq::emit(table, out, fmt);
  std::cerr << name << ": " << table.rows.size() << " rows -> " << out << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive dissipative state preparation: experiment runner"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "enumerate experiments with their figure anchors");

  auto* runcmd = app.add_subcommand("run", "run one experiment and write CSV or JSON");
  std::string experiment, out, config;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  runcmd->add_option("--experiment,-e", experiment, "experiment name");
  runcmd->add_option("--seed", seed, "master seed")->required();
  runcmd->add_option("--out,-o", out, "output path; .csv or .json selects the format")->required();
  runcmd->add_option("--config,-c", config, "JSON config file")->check(CLI::ExistingFile);
  runcmd->add_option("--set", sets, "override a parameter, key=value (repeatable)")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  try {
    if (list->parsed()) return list_experiments();
    return run(experiment, seed, out, config, sets);
  } catch (const adq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const adq::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
