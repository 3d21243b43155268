#include "adq/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "adq/analysis.hpp"
#include "adq/circuit.hpp"
#include "adq/errors.hpp"
#include "adq/models.hpp"
#include "adq/rng.hpp"
#include "adq/trajectory.hpp"

namespace adq {

using nlohmann::ordered_json;

namespace {

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return splitmix64(seed ^ splitmix64(k + 1)); }

// ---------------------------------------------------------------- registry

ordered_json obj(std::initializer_list<std::pair<const char*, ordered_json>> kv) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

std::vector<ExperimentInfo> build_registry() {
  using J = ordered_json;
  return {
      {"fig1b", "Fig. 1b", "Liouvillian gap vs pair entanglement for fermion, spin and adaptive chains",
       obj({{"n", 3}, {"J", 1.0}, {"Gamma", 1.0}, {"Delta", J::array({0.0, 2.0})},
            {"v2", J::array({0.0, 0.1, 0.2, 0.3, 0.4, 0.49})}, {"models", J::array({"fermion", "spin", "adaptive"})}})},
      {"fig2b", "Fig. 2b", "ensemble entanglement growth of the adaptive circuit",
       obj({{"n", 4}, {"J", 1.0}, {"v2", 0.5}, {"d", 27}, {"traj", 1000}, {"adaptive", true}, {"epsilon", 0.0}})},
      {"fig2c", "Fig. 2c", "single trajectories, adaptive against fixed parity",
       obj({{"n", 4}, {"J", 1.0}, {"v2", 0.5}, {"d", 40}, {"traj", 3}})},
      {"fig2d", "Fig. 2d", "non-adaptive circuit for several v2",
       obj({{"n", 4}, {"J", 1.0}, {"v2", J::array({0.3, 0.4, 0.45, 0.5})}, {"d", 200}, {"traj", 200}, {"every", 2}})},
      {"fig3", "Fig. 3", "squeezing quality and gap, standard and adaptive protocols",
       obj({{"N", J::array({8, 12, 16})}, {"r_max", 4.0}, {"r_step", 0.25}, {"Gamma", 1.0},
            {"protocols", J::array({"standard", "adaptive"})}})},
      {"figS2", "Fig. S2", "gap of random Lindbladians vs target Renyi-2 entropy",
       obj({{"N", 4}, {"m", 2}, {"seeds", 10}, {"S2_fraction", J::array({0.2, 0.4, 0.6, 0.8, 0.95})},
            {"with_aux", J::array({false, true})}})},
      {"figS5", "Fig. S5", "fitted relaxation length of the adaptive circuit",
       obj({{"two_n", J::array({4, 6, 8})}, {"J", 1.0}, {"v2", 0.5}, {"traj", 1000}, {"depth_factor", 8.0}})},
      {"figS6", "Fig. S6", "log negativity per pair under measurement errors",
       obj({{"n", 5}, {"J", 1.0}, {"v2", 0.5}, {"epsilon", J::array({0.0, 0.05, 0.1, 0.2})}, {"d", 40},
            {"traj", 200}, {"every", 2}, {"error_model", "miss_only"}})},
      {"figS7", "Fig. S7", "squeezing trajectories with missed detections and post-selection",
       obj({{"N", 24}, {"r", 2.0}, {"Gamma", 1.0}, {"epsilon", J::array({0.0, 0.05, 0.1})}, {"T", 10.0},
            {"dt", 1e-3}, {"checkpoint", 0.5}, {"traj", 500}})},
      {"custom", "-", "gap and kernel of a single named model",
       obj({{"model", "spin"}, {"n", 2}, {"J", 1.0}, {"Delta", 0.0}, {"Gamma", 1.0}, {"v2", 0.3}, {"N", 8},
            {"r", 1.0}, {"m", 2}, {"S2_fraction", 0.5}, {"with_aux", false}})},
  };
}

// ---------------------------------------------------------------- params

std::string kind(const ordered_json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return j.type_name();
}

bool compatible(const ordered_json& def, const ordered_json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number() && !v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    if (def.empty()) return true;
    for (const auto& e : v)
      if (!compatible(def.front(), e)) return false;
    return true;
  }
  return false;
}

// An array default also accepts a single scalar, which becomes a one-element list.
ordered_json coerce(const std::string& key, const ordered_json& def, const ordered_json& v) {
  ordered_json out = v;
  if (def.is_array() && !v.is_array()) out = ordered_json::array({v});
  if (def.is_number_float() && v.is_number_integer()) out = v.get<double>();
  if (def.is_array() && !def.empty() && def.front().is_number_float())
    for (auto& e : out)
      if (e.is_number_integer()) e = e.get<double>();
  if (!compatible(def, out))
    throw ConfigError("parameter '" + key + "' expects " + kind(def) + (def.is_array() ? " of " + kind(def.front()) : "") +
                      ", got " + kind(v));
  return out;
}

template <typename T>
T get(const ordered_json& p, const char* key) {
  return p.at(key).get<T>();
}

std::size_t get_size(const ordered_json& p, const char* key, std::int64_t min = 1) {
  const auto v = p.at(key).get<std::int64_t>();
  if (v < min) throw ConfigError(std::string("parameter '") + key + "' must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

double get_v2(double v2) {
  if (!(v2 >= 0.0 && v2 <= 1.0)) throw ConfigError("v2 must lie in [0, 1]");
  return v2;
}

// ---------------------------------------------------------------- helpers

void check_side(std::size_t D, const std::string& what) {
  if (D * D > max_superoperator_side)
    throw ResourceLimit(what + ": Liouvillian side " + std::to_string(D * D) + " exceeds " +
                        std::to_string(max_superoperator_side) + "; reduce the system size");
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct GapInfo {
  double gap;
  std::int64_t zero_modes;
  std::string status;
};

GapInfo gap_info(const LindbladModel& m) {
  check_side(m.dim(), m.name);
  const auto sd = spectral_data(build_superoperator(m), std::nullopt, false);
  std::int64_t zeros = 0;
  for (const auto& l : sd.eigenvalues)
    if (std::abs(l) <= sd.ztol) ++zeros;
  if (!sd.gap) return {nan(), zeros, "no_relaxation"};
  return {*sd.gap, zeros, "ok"};
}

LindbladModel chain_model(const std::string& which, const ChainParams& p) {
  const std::size_t D = std::size_t{1} << (2 * p.n + (which == "adaptive" ? 1 : 0));
  check_side(D, which + " chain, 2n=" + std::to_string(2 * p.n));
  if (which == "fermion") return fermion_chain(p);
  if (which == "spin") return spin_chain(p);
  if (which == "string") return string_spin_model(p);
  if (which == "adaptive") return adaptive_continuous(p);
  throw ConfigError("unknown chain model '" + which + "' (fermion, spin, string, adaptive)");
}

RecordError error_model(const std::string& s) {
  if (s == "miss_only") return RecordError::miss_only;
  if (s == "symmetric") return RecordError::symmetric;
  throw ConfigError("error_model must be miss_only or symmetric");
}

CircuitParams circuit_params(std::size_t n, double v2, double J) { return CircuitParams::from_v2(n, get_v2(v2), J); }

// ---------------------------------------------------------------- experiments

ResultTable fig1b(const ordered_json& p, std::uint64_t) {
  ResultTable t;
  t.columns = {{"model", "1", ColumnType::text},
               {"Delta", "J", ColumnType::real},
               {"v2", "1", ColumnType::real},
               {"S_vN", "nat", ColumnType::real},
               {"gap", "Gamma", ColumnType::real}};
  const auto n = get_size(p, "n");
  for (const auto& model : p.at("models"))
    for (double Delta : p.at("Delta"))
      for (double v2 : p.at("v2")) {
        const auto cp = ChainParams::from_v2(n, get_v2(v2), get<double>(p, "J"), Delta, get<double>(p, "Gamma"));
        const auto g = gap_info(chain_model(model.get<std::string>(), cp));
        t.add_row({model.get<std::string>(), Delta, v2, static_cast<double>(n) * pair_entropy(cp.u, cp.v), g.gap});
      }
  return t;
}

ResultTable fig2b(const ordered_json& p, std::uint64_t seed) {
  CircuitOptions opt;
  opt.adaptive = get<bool>(p, "adaptive");
  opt.epsilon = get<double>(p, "epsilon");
  return run_circuit(circuit_params(get_size(p, "n"), get<double>(p, "v2"), get<double>(p, "J")), get_size(p, "d"),
                     opt, seed, get_size(p, "traj"))
      .table;
}

ResultTable fig2c(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"protocol", "1", ColumnType::text},
               {"trajectory", "1", ColumnType::integer},
               {"cycle", "cycles", ColumnType::integer},
               {"S_vN", "nat", ColumnType::real}};
  const auto cp = circuit_params(get_size(p, "n"), get<double>(p, "v2"), get<double>(p, "J"));
  for (bool adaptive : {true, false}) {
    CircuitOptions opt;
    opt.adaptive = adaptive;
    opt.keep_trajectories = true;
    const auto r = run_circuit(cp, get_size(p, "d"), opt, seed, get_size(p, "traj"));
    for (std::size_t i = 0; i < r.trajectories.size(); ++i)
      for (std::size_t k = 0; k < r.cycles.size(); ++k)
        t.add_row({std::string(adaptive ? "adaptive" : "fixed"), static_cast<std::int64_t>(i),
                   static_cast<std::int64_t>(r.cycles[k]), r.trajectories[i][k]});
  }
  return t;
}

ResultTable fig2d(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"v2", "1", ColumnType::real},
               {"cycle", "cycles", ColumnType::integer},
               {"mean_S_vN", "nat", ColumnType::real},
               {"std_S_vN", "nat", ColumnType::real}};
  CircuitOptions opt;
  opt.adaptive = false;
  opt.record_every = get_size(p, "every");
  std::uint64_t k = 0;
  for (double v2 : p.at("v2")) {
    const auto r = run_circuit(circuit_params(get_size(p, "n"), v2, get<double>(p, "J")), get_size(p, "d"), opt,
                               sub_seed(seed, k++), get_size(p, "traj"));
    for (std::size_t i = 0; i < r.table.rows.size(); ++i)
      t.add_row({v2, static_cast<std::int64_t>(r.cycles[i]), r.table.real_at(i, "mean_S_vN"),
                 r.table.real_at(i, "std_S_vN")});
  }
  return t;
}

ResultTable fig3(const ordered_json& p, std::uint64_t) {
  ResultTable t;
  t.columns = {{"protocol", "1", ColumnType::text},
               {"N", "1", ColumnType::integer},
               {"r", "1", ColumnType::real},
               {"xi2_over_min", "1", ColumnType::real},
               {"gap", "Gamma", ColumnType::real}};
  const double step = get<double>(p, "r_step"), r_max = get<double>(p, "r_max");
  if (!(step > 0) || !(r_max >= 0)) throw ConfigError("fig3: r_step must be positive and r_max non-negative");
  for (const auto& proto : p.at("protocols")) {
    const auto name = proto.get<std::string>();
    if (name != "standard" && name != "adaptive") throw ConfigError("fig3: protocols are standard and adaptive");
    for (int N : p.at("N"))
      for (int k = 0; k * step <= r_max + 1e-12; ++k) {
        const SqueezeParams sp{N, k * step, get<double>(p, "Gamma")};
        const auto m = name == "standard" ? squeezing_standard(sp) : squeezing_adaptive(sp);
        // both protocols share the dark state once the aux qubit is traced out
        const double xi = wineland(squeezing_dark_state(N, sp.r), N) * (N + 2) / 2.0;
        t.add_row({name, static_cast<std::int64_t>(N), sp.r, xi, gap_info(m).gap});
      }
  }
  return t;
}

ResultTable figS2(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"with_aux", "1", ColumnType::integer},
               {"seed", "1", ColumnType::integer},
               {"S2", "nat", ColumnType::real},
               {"gap", "Gamma", ColumnType::real}};
  const auto N = get_size(p, "N", 2), m = get_size(p, "m", 1), seeds = get_size(p, "seeds");
  if (N > 8) throw ResourceLimit("figS2: N = " + std::to_string(N) + " exceeds 8");
  for (bool aux : p.at("with_aux"))
    for (double f : p.at("S2_fraction")) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("figS2: S2_fraction must lie in (0, 1]");
      for (std::size_t s = 0; s < seeds; ++s) {
        const std::uint64_t model_seed = sub_seed(seed, s);
        const auto rm = random_lindbladian({N, m, f * std::log(static_cast<double>(N)), model_seed, aux});
        t.add_row({static_cast<std::int64_t>(aux), static_cast<std::int64_t>(s),
                   f * std::log(static_cast<double>(N)), gap_info(rm.model).gap});
      }
    }
  return t;
}

ResultTable figS5(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"two_n", "1", ColumnType::integer},
               {"xi", "cycles", ColumnType::real},
               {"amplitude", "nat", ColumnType::real},
               {"residual", "nat", ColumnType::real}};
  std::uint64_t k = 0;
  for (std::int64_t two_n : p.at("two_n")) {
    if (two_n < 2 || two_n % 2) throw ConfigError("figS5: two_n entries must be even and at least 2");
    const double depth = get<double>(p, "depth_factor") * 0.66 * static_cast<double>(two_n);
    if (!(depth >= 2)) throw ConfigError("figS5: depth_factor too small");
    const auto r = run_circuit(circuit_params(static_cast<std::size_t>(two_n / 2), get<double>(p, "v2"),
                                              get<double>(p, "J")),
                               static_cast<std::size_t>(std::ceil(depth)), {}, sub_seed(seed, k++),
                               get_size(p, "traj"));
    std::vector<double> d, S;
    for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
      d.push_back(r.table.real_at(i, "cycle"));
      S.push_back(r.table.real_at(i, "mean_S_vN"));
    }
    const auto fit = fit_relaxation(d, S);
    t.add_row({two_n, fit.xi, fit.amplitude, fit.residual});
  }
  return t;
}

ResultTable figS6(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"epsilon", "1", ColumnType::real},
               {"cycle", "cycles", ColumnType::integer},
               {"E_N_per_pair", "ebit", ColumnType::real}};
  const auto n = get_size(p, "n");
  const auto d = get_size(p, "d"), every = get_size(p, "every");
  const Register sys = Register::two_chains(n);
  std::vector<std::string> a;
  for (std::size_t i = 1; i <= n; ++i) a.push_back("A" + std::to_string(i));
  std::uint64_t k = 0;
  for (double eps : p.at("epsilon")) {
    CircuitOptions opt;
    opt.epsilon = eps;
    opt.error_model = error_model(get<std::string>(p, "error_model"));
    opt.record_every = d;
    for (std::size_t c = every; c <= d; c += every) opt.density_cycles.push_back(c);
    const auto r = run_circuit(circuit_params(n, get<double>(p, "v2"), get<double>(p, "J")), d, opt,
                               sub_seed(seed, k++), get_size(p, "traj"));
    for (const auto& [c, rho] : r.density)
      t.add_row({eps, static_cast<std::int64_t>(c), log_negativity(rho, a, sys) / static_cast<double>(n)});
  }
  return t;
}

ResultTable figS7(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"epsilon", "1", ColumnType::real},       {"postselected", "1", ColumnType::integer},
               {"t", "1/Gamma", ColumnType::real},        {"mean_xi2", "1", ColumnType::real},
               {"std_xi2", "1", ColumnType::real},        {"survival", "1", ColumnType::real}};
  const int N = get<int>(p, "N");
  const SqueezeParams sp{N, get<double>(p, "r"), get<double>(p, "Gamma")};
  const auto model = parity_switched_squeezing(sp);
  const Observable xi{"xi2", [N](const CVector& psi, int) { return wineland(psi, N); }};
  const CVector psi0 = CVector::Unit(N + 1, 0);
  std::uint64_t k = 0;
  for (double eps : p.at("epsilon")) {
    UnravelingConfig cfg;
    cfg.dt = get<double>(p, "dt");
    cfg.T = get<double>(p, "T");
    cfg.checkpoint_interval = get<double>(p, "checkpoint");
    cfg.epsilon = eps;
    const auto recs = mcwf_ensemble(model, FeedbackController::adaptive(), psi0, cfg, {xi}, sub_seed(seed, k++),
                                    get_size(p, "traj"));
    for (auto rule : {PostSelection::none, PostSelection::even_detected_jumps}) {
      const auto s = ensemble_stats(recs, rule);
      const double surv = s.metadata["survival_fraction"].get<double>();
      for (std::size_t i = 0; i < s.rows.size(); ++i)
        t.add_row({eps, static_cast<std::int64_t>(rule == PostSelection::even_detected_jumps), s.real_at(i, "t"),
                   s.real_at(i, "mean_xi2"), s.real_at(i, "std_xi2"), surv});
    }
  }
  return t;
}

ResultTable custom(const ordered_json& p, std::uint64_t seed) {
  ResultTable t;
  t.columns = {{"model", "1", ColumnType::text},
               {"dim", "1", ColumnType::integer},
               {"gap", "Gamma", ColumnType::real},
               {"zero_modes", "1", ColumnType::integer},
               {"status", "1", ColumnType::text}};
  const auto name = get<std::string>(p, "model");
  LindbladModel m;
  if (name == "squeeze_standard" || name == "squeeze_adaptive") {
    const SqueezeParams sp{get<int>(p, "N"), get<double>(p, "r"), get<double>(p, "Gamma")};
    m = name == "squeeze_standard" ? squeezing_standard(sp) : squeezing_adaptive(sp);
  } else if (name == "random") {
    const auto N = get_size(p, "N", 2);
    if (N > 8) throw ResourceLimit("random model: N = " + std::to_string(N) + " exceeds 8");
    const double f = get<double>(p, "S2_fraction");
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("S2_fraction must lie in (0, 1]");
    m = random_lindbladian({N, get_size(p, "m"), f * std::log(static_cast<double>(N)), seed, get<bool>(p, "with_aux")})
            .model;
  } else {
    m = chain_model(name, ChainParams::from_v2(get_size(p, "n"), get_v2(get<double>(p, "v2")), get<double>(p, "J"),
                                               get<double>(p, "Delta"), get<double>(p, "Gamma")));
  }
  const auto g = gap_info(m);
  t.add_row({name, static_cast<std::int64_t>(m.dim()), g.gap, g.zero_modes, g.status});
  return t;
}

const std::map<std::string, std::function<ResultTable(const ordered_json&, std::uint64_t)>> runners = {
    {"fig1b", fig1b}, {"fig2b", fig2b}, {"fig2c", fig2c}, {"fig2d", fig2d}, {"fig3", fig3},
    {"figS2", figS2}, {"figS5", figS5}, {"figS6", figS6}, {"figS7", figS7}, {"custom", custom},
};

} // namespace

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> reg = build_registry();
  return reg;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw ConfigError("unknown experiment '" + name + "' (see 'list')");
}

std::pair<std::string, ordered_json> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "' is not key=value");
  const std::string key = text.substr(0, eq), raw = text.substr(eq + 1);
  ordered_json v = ordered_json::parse(raw, nullptr, false);
  if (v.is_discarded()) v = raw;
  return {key, v};
}

ordered_json resolve_params(const ExperimentInfo& info, const ordered_json& file_params,
                            const std::vector<std::string>& overrides) {
  ordered_json out = info.defaults;
  auto apply = [&](const std::string& key, const ordered_json& v) {
    if (!out.contains(key)) {
      std::string known;
      for (const auto& [k, _] : info.defaults.items()) known += (known.empty() ? "" : ", ") + k;
      throw ConfigError("experiment '" + info.name + "' has no parameter '" + key + "' (known: " + known + ")");
    }
    out[key] = coerce(key, info.defaults.at(key), v);
  };
  if (!file_params.is_null()) {
    if (!file_params.is_object()) throw ConfigError("config 'params' must be an object");
    for (const auto& [k, v] : file_params.items()) apply(k, v);
  }
  for (const auto& s : overrides) {
    const auto [k, v] = parse_assignment(s);
    apply(k, v);
  }
  return out;
}

ordered_json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ordered_json j = ordered_json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config file '" + path + "' is not a JSON object");
  if (!j.contains("schema_version") || j["schema_version"] != config_schema_version)
    throw ConfigError("config file '" + path + "' must carry schema_version " + std::to_string(config_schema_version));
  for (const auto& [k, _] : j.items())
    if (k != "schema_version" && k != "experiment" && k != "params")
      throw ConfigError("config file: unknown top-level key '" + k + "'");
  return j;
}

ResultTable run_experiment(const std::string& name, const ordered_json& params, std::uint64_t seed) {
  find_experiment(name);
  ResultTable t;
  try {
    t = runners.at(name)(params, seed);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("bad parameter value: ") + e.what());
  }
  const ordered_json identity = {{"experiment", name}, {"seed", seed}, {"params", params}};
  ordered_json meta = ordered_json::object();
  meta["experiment"] = name;
  meta["anchor"] = find_experiment(name).anchor;
  meta["seed"] = seed;
  meta["params"] = params;
  meta["config_hash"] = config_hash(identity);
  meta["code_version"] = code_version;
  for (const auto& [k, v] : t.metadata.items()) meta["result"][k] = v;
  t.metadata = std::move(meta);
  return t;
}

void stamp_run(ResultTable& t, double runtime_seconds) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  t.metadata["run"] = {{"timestamp", buf}, {"runtime_seconds", runtime_seconds}};
}

} // namespace adq
