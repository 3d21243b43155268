#include <doctest.h>

#include <random>

#include "adq/analysis.hpp"
#include "adq/trajectory.hpp"

using namespace adq;

namespace {

LindbladModel damping(double gamma = 1.0) {
  LindbladModel m;
  m.name = "damping";
  m.reg = Register::qubits({"q"});
  m.H = CMatrix::Zero(2, 2);
  m.jumps = {{pauli::minus(), gamma}};
  return m;
}

Observable excited() {
  return {"p1", [](const CVector& psi, int) { return std::norm(psi[1]); }};
}

std::vector<std::string> chain_a(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("A" + std::to_string(i));
  return out;
}

Observable chain_entropy_obs(std::size_t n) {
  const Register reg = Register::two_chains(n);
  return {"S_vN", [reg, n](const CVector& psi, int) { return entanglement_entropy(psi, chain_a(n), reg).nats(); }};
}

TrajectoryRecord fake_record(std::vector<double> values, std::size_t detected) {
  TrajectoryRecord r;
  r.observable_names = {"x"};
  for (std::size_t k = 0; k < values.size(); ++k) {
    r.checkpoint_times.push_back(static_cast<double>(k));
    r.values.push_back({values[k]});
  }
  for (std::size_t k = 0; k < detected; ++k) {
    r.jump_times.push_back(0.1 * static_cast<double>(k));
    r.channels.push_back(0);
    r.detected.push_back(1);
    r.parity_history.push_back(k % 2 ? 1 : -1);
  }
  return r;
}

} // namespace

TEST_CASE("configuration checks") {
  UnravelingConfig cfg;
  cfg.checkpoint_interval = 0.015;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epsilon = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(FeedbackController(0, nullptr), ConfigError);
  cfg = {};
  const auto sm = SwitchedModel::single(damping());
  CHECK_THROWS_AS(mcwf_run(sm, FeedbackController::fixed(), CVector::Unit(4, 0), cfg, {}, 1), ConfigError);
  CHECK_THROWS_AS(mcwf_run(sm, FeedbackController::fixed(), CVector(2 * CVector::Unit(2, 0)), cfg, {}, 1),
                  ConfigError);
}

TEST_CASE("controller rules") {
  auto a = FeedbackController::adaptive();
  a.on_detected_jump(0);
  CHECK(a.parity() == -1);
  CHECK(a.active_set() == 1);
  a.on_detected_jump(1);
  CHECK(a.parity() == 1);
  CHECK(a.active_set() == 0);
  auto f = FeedbackController::fixed(-1);
  CHECK(f.active_set() == 1);
  f.on_detected_jump(0);
  CHECK(f.parity() == 1);
  CHECK(f.active_set() == 1);
}

TEST_CASE("dark initial state produces no jumps") {
  const auto sm = SwitchedModel::single(damping());
  UnravelingConfig cfg;
  cfg.T = 2.0;
  cfg.checkpoint_interval = 0.5;
  const auto rec = mcwf_run(sm, FeedbackController::fixed(), CVector::Unit(2, 0), cfg, {excited()}, 3);
  CHECK(rec.jump_times.empty());
  CHECK(rec.checkpoint_times.size() == 5);
  for (const auto& v : rec.values) CHECK(v[0] == 0.0);
  CHECK(std::abs(std::abs(rec.final_state[0]) - 1.0) < 1e-12);
}

TEST_CASE("amplitude damping ensemble matches the analytic decay") {
  const auto sm = SwitchedModel::single(damping());
  UnravelingConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 3.0;
  cfg.checkpoint_interval = 0.5;
  const std::size_t n = 1000;
  const auto recs = mcwf_ensemble(sm, FeedbackController::fixed(), CVector::Unit(2, 1), cfg, {excited()}, 42, n);
  const auto table = ensemble_stats(recs);
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const double t = table.real_at(k, "t");
    const double p = std::exp(-t);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n)) + 1e-12;
    CHECK(std::abs(table.real_at(k, "mean_p1") - p) <= 3.0 * sigma);
  }
  for (const auto& r : recs) {
    CHECK(r.jump_times.size() <= 1);
    CHECK(std::abs(r.final_state.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("ensemble average converges to the master equation on three qubits") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> nd;
  LindbladModel m;
  m.reg = Register::qubits({"a", "b", "c"});
  m.H = embed(pauli::x(), "a", m.reg) + 0.7 * embed(kron(pauli::z(), pauli::z()), {"a", "b"}, m.reg) +
        0.4 * embed(pauli::y(), "c", m.reg);
  m.jumps = {{embed(pauli::minus(), "a", m.reg), 0.8},
             {embed(kron(pauli::minus(), pauli::plus()), {"b", "c"}, m.reg), 1.2},
             {embed(pauli::z(), "c", m.reg), 0.3}};
  CVector psi0 = CVector::Zero(8);
  psi0[0b011] = 1.0;

  UnravelingConfig cfg;
  cfg.dt = 0.005;
  cfg.T = 2.0;
  cfg.checkpoint_interval = 0.25;
  const std::size_t n = 800;
  const CMatrix Za = embed(pauli::z(), "a", m.reg), Zc = embed(pauli::z(), "c", m.reg);
  std::vector<Observable> obs = {
      {"za", [Za](const CVector& psi, int) { return psi.dot(Za * psi).real(); }},
      {"zc", [Zc](const CVector& psi, int) { return psi.dot(Zc * psi).real(); }}};
  const auto recs = mcwf_ensemble(SwitchedModel::single(m), FeedbackController::fixed(), psi0, cfg, obs, 9, n);
  const auto table = ensemble_stats(recs);

  std::vector<double> times;
  for (std::size_t k = 0; k < table.rows.size(); ++k) times.push_back(table.real_at(k, "t"));
  const auto rhos = evolve(m, projector(psi0), times);
  const double bound = 4.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(std::abs(table.real_at(k, "mean_za") - (rhos[k] * Za).trace().real()) <= bound);
    CHECK(std::abs(table.real_at(k, "mean_zc") - (rhos[k] * Zc).trace().real()) <= bound);
  }
}

TEST_CASE("parity record follows the detected jumps") {
  const auto p = ChainParams::from_v2(2, 0.5);
  const auto sm = parity_switched_chain(p);
  for (double eps : {0.0, 0.3}) {
    UnravelingConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 20.0;
    cfg.checkpoint_interval = 1.0;
    cfg.epsilon = eps;
    const auto recs = mcwf_ensemble(sm, FeedbackController::adaptive(), CVector::Unit(16, 0), cfg, {}, 77, 40);
    std::size_t missed = 0;
    for (const auto& r : recs) {
      int P = r.initial_parity;
      for (std::size_t k = 0; k < r.jump_times.size(); ++k) {
        if (r.detected[k]) P = -P;
        else ++missed;
        CHECK(r.parity_history[k] == P);
      }
      const int expect = (r.detected_count() % 2 == 0) ? 1 : -1;
      CHECK(r.final_parity() == expect * r.initial_parity);
      for (std::size_t k = 1; k < r.jump_times.size(); ++k) CHECK(r.jump_times[k] >= r.jump_times[k - 1]);
    }
    if (eps == 0.0) CHECK(missed == 0);
    else CHECK(missed > 0);
  }
}

TEST_CASE("physical parity equals the classical bit without record errors") {
  const auto p = ChainParams::from_v2(2, 0.4);
  const auto sm = parity_switched_chain(p);
  const CMatrix P = total_parity(sm.reg);
  UnravelingConfig cfg;
  cfg.T = 10.0;
  cfg.checkpoint_interval = 0.5;
  Observable mismatch{"mismatch", [P](const CVector& psi, int parity) {
                        return std::abs(psi.dot(P * psi).real() - parity);
                      }};
  const auto recs = mcwf_ensemble(sm, FeedbackController::adaptive(), CVector::Unit(16, 0), cfg, {mismatch}, 5, 20);
  for (const auto& r : recs)
    for (const auto& v : r.values) CHECK(v[0] < 1e-10);
}

TEST_CASE("entanglement grows monotonically under adaptive feedback") {
  const std::size_t n = 2;
  const auto p = ChainParams::from_v2(n, 0.5);
  const auto sm = parity_switched_chain(p);
  UnravelingConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 20.0;
  cfg.checkpoint_interval = 0.1;
  // the empty state for these jumps is A empty, B filled
  const CVector vac = CVector::Unit(16, 0b0011);

  const auto adaptive = mcwf_ensemble(sm, FeedbackController::adaptive(), vac, cfg, {chain_entropy_obs(n)}, 1, 100);
  double worst = 0.0;
  for (const auto& r : adaptive)
    for (std::size_t k = 1; k < r.values.size(); ++k) worst = std::min(worst, r.values[k][0] - r.values[k - 1][0]);
  CHECK(worst >= -1e-9);

  // the fixed-parity control violates monotonicity on at least one trajectory
  const auto fixed = mcwf_ensemble(sm, FeedbackController::fixed(), vac, cfg, {chain_entropy_obs(n)}, 1, 100);
  std::size_t violating = 0;
  for (const auto& r : fixed) {
    bool v = false;
    for (std::size_t k = 1; k < r.values.size(); ++k) v = v || r.values[k][0] < r.values[k - 1][0] - 1e-9;
    violating += v;
  }
  CHECK(violating > 0);
}

TEST_CASE("seeded runs are reproducible and independent of worker count") {
  const auto sm = parity_switched_chain(ChainParams::from_v2(1, 0.3));
  UnravelingConfig cfg;
  cfg.T = 5.0;
  cfg.checkpoint_interval = 0.5;
  const CVector vac = CVector::Unit(4, 0);
  const auto a = mcwf_ensemble(sm, FeedbackController::adaptive(), vac, cfg, {}, 123, 8);
  const auto b = mcwf_ensemble(sm, FeedbackController::adaptive(), vac, cfg, {}, 123, 8);
  const auto c = mcwf_run(sm, FeedbackController::adaptive(), vac, cfg, {}, 123, 5);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].jump_times == b[k].jump_times);
    CHECK(a[k].channels == b[k].channels);
  }
  CHECK(a[5].jump_times == c.jump_times);
  CHECK((a[5].final_state - c.final_state).norm() == 0.0);
}

TEST_CASE("ensemble statistics") {
  const auto one = ensemble_stats({fake_record({1.0, 2.0}, 0)});
  CHECK(one.real_at(1, "mean_x") == 2.0);
  CHECK(one.real_at(1, "std_x") == 0.0);
  CHECK(one.columns[0].unit == "1/Gamma");

  const auto two = ensemble_stats({fake_record({1.0, 2.0}, 0), fake_record({3.0, -2.0}, 0)});
  CHECK(two.real_at(0, "mean_x") == 2.0);
  CHECK(two.real_at(0, "std_x") == doctest::Approx(1.0));
  CHECK(two.real_at(1, "std_x") == doctest::Approx(2.0));

  auto odd = fake_record({0.0, 0.0}, 3);
  auto even = fake_record({0.0, 0.0}, 2);
  const std::vector<TrajectoryRecord> recs = {odd, even, even};
  CHECK(postselect(recs, PostSelection::none).size() == 3);
  CHECK(postselect(recs, PostSelection::even_detected_jumps).size() == 2);
  const auto stats = ensemble_stats(recs, PostSelection::even_detected_jumps);
  CHECK(stats.metadata["survival_fraction"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(stats.metadata["n_survivors"].get<std::size_t>() == 2);

  auto shifted = fake_record({0.0, 0.0}, 0);
  shifted.checkpoint_times[1] = 5.0;
  CHECK_THROWS_AS(ensemble_stats({fake_record({0.0, 0.0}, 0), shifted}), ConfigError);
}
