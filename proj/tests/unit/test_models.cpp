#include <doctest.h>

#include "adq/analysis.hpp"
#include "adq/models.hpp"

using namespace adq;

namespace {

double maxabs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

std::vector<cplx> sorted_spectrum(const LindbladModel& m) {
  const auto sd = spectral_data(build_superoperator(m));
  std::vector<cplx> out(sd.eigenvalues.begin(), sd.eigenvalues.end());
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    if (std::abs(a.real() - b.real()) > 1e-6) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

// multiset match: greedy nearest-neighbour pairing on sorted lists
double spectrum_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const auto& x : a) {
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < b.size(); ++k)
      if (!used[k] && std::abs(x - b[k]) < best) best = std::abs(x - b[k]), arg = k;
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

double gap_of(const LindbladModel& m) { return spectral_data(build_superoperator(m), std::nullopt, false).gap.value(); }

std::vector<std::string> chain_a(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("A" + std::to_string(i));
  return out;
}

} // namespace

TEST_CASE("chain parameter validation") {
  CHECK_THROWS_AS(ChainParams::from_v2(2, 1.5), ConfigError);
  ChainParams p;
  p.u = 1.0;
  p.v = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(spin_chain(ChainParams::from_v2(7, 0.2)), ResourceLimit);
  CHECK_THROWS_AS(squeezing_standard({3, 0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(squeezing_standard({4, -0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(string_spin_model(ChainParams::from_v2(2, 0.2, 1.0, 2.0)), ConfigError);
}

TEST_CASE("fermion chain dark state") {
  for (double v2 : {0.0, 0.2, 0.5}) {
    for (double Delta : {0.0, 2.0}) {
      const auto p = ChainParams::from_v2(3, v2, 1.0, Delta);
      const auto m = fermion_chain(p);
      const CVector psi = fermion_dimer_state(p);
      CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
      for (const auto& j : m.jumps) CHECK((j.op * psi).norm() < 1e-10);
      const CVector Hpsi = m.H * psi;
      const cplx e = psi.dot(Hpsi);
      CHECK((Hpsi - e * psi).norm() < 1e-10);
    }
  }
  const auto p0 = ChainParams::from_v2(2, 0.0);
  const CVector vac = fermion_dimer_state(p0);
  CHECK(std::abs(vac[0]) == doctest::Approx(1.0));
  CHECK(entanglement_entropy(vac, chain_a(2), fermion_chain(p0).reg).nats() == doctest::Approx(0.0));
}

TEST_CASE("spin chain dark state and pair entropy") {
  for (double v2 : {0.0, 0.1, 0.3, 0.5}) {
    const auto p = ChainParams::from_v2(3, v2, 1.0, 2.0);
    const auto m = spin_chain(p);
    const CVector psi = spin_dimer_state(p);
    for (const auto& j : m.jumps) CHECK((j.op * psi).norm() < 1e-10);
    const CVector Hpsi = m.H * psi;
    CHECK((Hpsi - psi.dot(Hpsi) * psi).norm() < 1e-10);
    const double S = entanglement_entropy(psi, chain_a(3), m.reg).nats();
    // oracle: per-pair Schmidt coefficients (u, -v)
    const double u2 = 1.0 - v2;
    double pair = 0.0;
    if (u2 > 0) pair -= u2 * std::log(u2);
    if (v2 > 0) pair -= v2 * std::log(v2);
    CHECK(S == doctest::Approx(3.0 * pair).epsilon(1e-10));
    CHECK(pair_entropy(p.u, p.v) == doctest::Approx(pair).epsilon(1e-12));
    // fermion and spin dimer states share the entanglement profile
    const double Sf = entanglement_entropy(fermion_dimer_state(p), chain_a(3), m.reg).nats();
    CHECK(Sf == doctest::Approx(S).epsilon(1e-10));
  }
}

TEST_CASE("spin chain slows down as entanglement grows") {
  const double g_small = gap_of(spin_chain(ChainParams::from_v2(3, 0.01)));
  const double g_large = gap_of(spin_chain(ChainParams::from_v2(3, 0.49)));
  CHECK(g_large < 0.1 * g_small);
}

TEST_CASE("string model is spectrally equivalent to the fermion chain") {
  for (double v2 : {0.0, 0.3, 0.5}) {
    const auto p = ChainParams::from_v2(2, v2);
    const double d = spectrum_distance(sorted_spectrum(string_spin_model(p)), sorted_spectrum(fermion_chain(p)));
    CHECK(d < 1e-8);
  }
}

TEST_CASE("string model parity symmetry") {
  const auto p = ChainParams::from_v2(2, 0.3);
  const auto m = string_spin_model(p);
  const CMatrix P = total_parity(m.reg);
  CHECK(maxabs(commutator(m.H, P)) < 1e-12);
  for (const auto& j : m.jumps) CHECK(maxabs(anticommutator(j.op, P)) < 1e-12);

  // v = 0: the string survives on the u term of L2, so only L1, H and the spectrum coincide
  const auto s0 = string_spin_model(ChainParams::from_v2(2, 0.0));
  const auto c0 = spin_chain(ChainParams::from_v2(2, 0.0));
  CHECK(maxabs(s0.H - c0.H) < 1e-14);
  CHECK(maxabs(s0.jumps[0].op - c0.jumps[0].op) < 1e-14);
  CHECK(spectrum_distance(sorted_spectrum(s0), sorted_spectrum(c0)) < 1e-8);
}

TEST_CASE("adaptive continuous model") {
  const auto p = ChainParams::from_v2(2, 0.3);
  const auto m = adaptive_continuous(p);
  CHECK(m.reg.labels().back() == "aux");
  CHECK(m.reg.dim() == 32);

  // one dimer per aux sector, v -> -v between them; both reduce to the same chain-A state
  CHECK(dark_subspace(m).basis.size() == 2);
  CHECK_THROWS_AS(steady_state_dark(m), DegenerateKernel);
  const CMatrix rho0 = projector(CVector::Unit(32, 0));
  const CMatrix rho_ss = evolve(m, rho0, {400.0}).back();
  const CMatrix rho_a = partial_trace(rho_ss, chain_a(2), m.reg);
  const double S = von_neumann_entropy(rho_a).nats();
  CHECK(S == doctest::Approx(2.0 * pair_entropy(p.u, p.v)).epsilon(1e-7));

  // aux phase convention does not change the spectrum
  const double d = spectrum_distance(sorted_spectrum(m), sorted_spectrum(adaptive_continuous(p, -1)));
  CHECK(d < 1e-8);

  // v = 0: gap equals the plain spin chain's
  const auto p0 = ChainParams::from_v2(2, 0.0);
  CHECK(gap_of(adaptive_continuous(p0)) == doctest::Approx(gap_of(spin_chain(p0))).epsilon(1e-8));
  CHECK_THROWS_AS(adaptive_continuous(p, 0), ConfigError);
}

TEST_CASE("standard squeezing model") {
  const auto m0 = squeezing_standard({6, 0.0, 1.0});
  const auto top = steady_state_dark(m0);
  REQUIRE(top.has_value());
  CHECK(std::abs(std::abs((*top)[0]) - 1.0) < 1e-12);

  // superradiant gap grows with N at r = 0
  double prev = 0.0;
  for (int N : {2, 4, 8, 12}) {
    const double g = gap_of(squeezing_standard({N, 0.0, 1.0}));
    CHECK(g > prev);
    prev = g;
  }

  const CVector dark = squeezing_dark_state(2, 0.4);
  CHECK(std::abs(dark[2] / dark[0] + std::tanh(0.4)) < 1e-12);
  CHECK(dark[0].real() > 0);

  // exponential slowdown at large squeezing
  const int N = 10;
  const double slope = (std::log(gap_of(squeezing_standard({N, 3.0, 1.0}))) -
                        std::log(gap_of(squeezing_standard({N, 2.5, 1.0})))) / 0.5;
  CHECK(slope == doctest::Approx(-4.0).epsilon(0.1));
}

TEST_CASE("adaptive squeezing model") {
  const SqueezeParams sp{8, 1.0, 1.0};
  const auto m = squeezing_adaptive(sp);
  CHECK(m.reg.labels() == std::vector<std::string>{"aux", "S"});
  const auto sd = spectral_data(build_superoperator(m));
  REQUIRE(sd.gap.has_value());
  CHECK(*sd.gap > 0.1);
  REQUIRE(!sd.steady_states.empty());
  const CMatrix rho_s = partial_trace(sd.steady_states[0], {"S"}, m.reg);
  const double xi_adaptive = wineland(rho_s, sp.N);
  const double xi_standard = wineland(squeezing_dark_state(sp.N, sp.r), sp.N);
  CHECK(xi_adaptive == doctest::Approx(xi_standard).epsilon(1e-6));

  const double d = spectrum_distance(sorted_spectrum(m), sorted_spectrum(squeezing_adaptive(sp, -1)));
  CHECK(d < 1e-8);

  // r = 0: the Dicke-sector gap matches the standard model
  const double g_std = gap_of(squeezing_standard({8, 0.0, 1.0}));
  CHECK(gap_of(squeezing_adaptive({8, 0.0, 1.0})) == doctest::Approx(g_std).epsilon(1e-8));
}

TEST_CASE("random Lindbladians") {
  for (bool aux : {false, true}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      RandomModelParams rp{4, 2, 0.8, seed, aux};
      const auto rm = random_lindbladian(rp);
      CHECK(rm.model.jumps.size() == 2);
      for (const auto& j : rm.model.jumps) CHECK((j.op * rm.target_state).norm() < 1e-10);
      CHECK(std::abs(rm.target_state.norm() - 1.0) < 1e-12);
      const double S2 = -std::log(rm.schmidt.array().pow(4).sum());
      CHECK(S2 == doctest::Approx(0.8).epsilon(1e-5));
      CHECK(rm.model.reg.dim() == (aux ? 32u : 16u));
    }
  }
  const auto uniform = random_lindbladian({4, 2, std::log(4.0), 7, false});
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(uniform.schmidt[i] == doctest::Approx(0.5).epsilon(1e-6));

  // seed determinism
  const auto a = random_lindbladian({3, 2, 0.5, 11, false});
  const auto b = random_lindbladian({3, 2, 0.5, 11, false});
  CHECK(maxabs(a.model.jumps[0].op - b.model.jumps[0].op) == 0.0);

  CHECK_THROWS_AS(random_lindbladian({1, 2, 0.0, 1, false}), ConfigError);
  CHECK_THROWS_AS(random_lindbladian({4, 1, 0.5, 1, false}), ConfigError);
  CHECK_THROWS_AS(random_lindbladian({4, 2, 2.0, 1, false}), ConfigError);
}
