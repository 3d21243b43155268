#include "adq/circuit.hpp"

#include <algorithm>
#include <cmath>

#include "adq/parallel.hpp"
#include "adq/rng.hpp"

namespace adq {

namespace {
using ColMatrix = Eigen::MatrixXcd;

std::string label(char c, std::size_t i) { return std::string(1, c) + std::to_string(i); }

double aux_one_probability(const CVector& psi) {
  double p = 0;
  for (Eigen::Index k = 1; k < psi.size(); k += 2) p += std::norm(psi[k]);
  return p;
}

// Project aux onto `outcome`, then move it back to |0>.
void project_and_reset(CVector& psi, int outcome) {
  double norm2 = 0;
  for (Eigen::Index k = 0; k < psi.size(); k += 2) {
    const cplx keep = outcome ? psi[k + 1] : psi[k];
    psi[k] = keep;
    psi[k + 1] = 0;
    norm2 += std::norm(keep);
  }
  if (!(norm2 > 1e-300)) throw NumericError("circuit: measurement outcome with vanishing probability");
  psi /= std::sqrt(norm2);
}
} // namespace

CircuitParams CircuitParams::from_v2(std::size_t n, double v2, double J) {
  if (!(v2 >= 0.0 && v2 <= 1.0)) throw ConfigError("circuit: v^2 must lie in [0, 1]");
  CircuitParams p;
  p.n = n;
  p.J = J;
  p.u = std::sqrt(1.0 - v2);
  p.v = std::sqrt(v2);
  return p;
}

void CircuitParams::validate() const {
  if (n < 1) throw ConfigError("circuit: n must be at least 1");
  if (2 * n + 1 > max_circuit_qubits)
    throw ResourceLimit("circuit: 2n+1 = " + std::to_string(2 * n + 1) + " qubits exceeds " +
                        std::to_string(max_circuit_qubits) + "; reduce n");
  if (std::abs(u * u + v * v - 1.0) > 1e-12) throw ConfigError("circuit: u^2 + v^2 must equal 1");
  if (!std::isfinite(J) || !std::isfinite(theta)) throw ConfigError("circuit: J and theta must be finite");
}

Register circuit_register(std::size_t n) { return Register::two_chains(n, true); }

CMatrix GateLayer::dense(const Register& reg) const {
  const auto D = static_cast<Eigen::Index>(reg.dim());
  CMatrix U = CMatrix::Identity(D, D);
  for (const auto& g : gates) {
    std::vector<std::string> sites;
    for (auto q : g.qubits) sites.push_back(reg.factor(q).label);
    U = embed(g.U, sites, reg) * U;
  }
  return U;
}

CircuitGates build_gates(const CircuitParams& p, int P) {
  p.validate();
  if (P != 1 && P != -1) throw ConfigError("build_gates: P must be +1 or -1");
  const Register reg = circuit_register(p.n);
  CMatrix hop = kron(pauli::plus(), pauli::minus());
  hop += hop.adjoint().eval();

  CircuitGates g;
  for (char c : {'A', 'B'}) {
    const double s = (p.signed_hopping && c == 'B') ? -1.0 : 1.0;
    const CMatrix U = expm(-I_unit * (p.theta * p.J * s) * hop, true);
    for (std::size_t i = 1; i < p.n; ++i) {
      LocalGate lg{{reg.position(label(c, i)), reg.position(label(c, i + 1))}, U};
      (i % 2 == 1 ? g.H1 : g.H2).gates.push_back(lg);
    }
  }

  auto jump = [&](char x, char y) {
    // K = s+_aux (u s-_X - v P s+_Y) on (aux, X1, Y1)
    const CMatrix K = kron(pauli::plus(), CMatrix(p.u * kron(pauli::minus(), pauli::id()) -
                                                 p.v * P * kron(pauli::id(), pauli::plus())));
    const CMatrix U = expm(-I_unit * p.theta * (K + K.adjoint()), true);
    return LocalGate{{reg.position("aux"), reg.position(label(x, 1)), reg.position(label(y, 1))}, U};
  };
  g.jump1 = jump('A', 'B');
  g.jump2 = jump('B', 'A');
  return g;
}

void apply_gate(CVector& psi, const LocalGate& g, const Register& reg) {
  const std::size_t k = g.qubits.size();
  const std::size_t L = std::size_t{1} << k;
  std::vector<std::size_t> off(L, 0);
  std::size_t mask = 0;
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t j = 0; j < k; ++j)
      if (l >> (k - 1 - j) & 1) off[l] += reg.stride(g.qubits[j]);
  for (auto q : g.qubits) mask |= reg.stride(q);
  CVector a(static_cast<Eigen::Index>(L)), b;
  for (std::size_t base = 0; base < reg.dim(); ++base) {
    if (base & mask) continue;
    for (std::size_t l = 0; l < L; ++l) a[static_cast<Eigen::Index>(l)] = psi[static_cast<Eigen::Index>(base + off[l])];
    b.noalias() = g.U * a;
    for (std::size_t l = 0; l < L; ++l) psi[static_cast<Eigen::Index>(base + off[l])] = b[static_cast<Eigen::Index>(l)];
  }
}

void apply_layer(CVector& psi, const GateLayer& layer, const Register& reg) {
  for (const auto& g : layer.gates) apply_gate(psi, g, reg);
}

CircuitProgram::CircuitProgram(const CircuitParams& p)
    : params(p), reg(circuit_register(p.n)), gates{build_gates(p, 1), build_gates(p, -1)} {}

CircuitState initial_state(const CircuitProgram& prog, CircuitInit init, std::uint64_t seed, std::uint64_t index) {
  CircuitState st;
  st.psi = CVector::Zero(static_cast<Eigen::Index>(prog.reg.dim()));
  std::size_t idx = 0;
  if (init == CircuitInit::b_excited)
    for (std::size_t i = 1; i <= prog.params.n; ++i) idx += prog.reg.stride(prog.reg.position(label('B', i)));
  st.psi[static_cast<Eigen::Index>(idx)] = 1.0;
  st.P = 1;
  st.cycle = 0;
  st.rng = make_stream(seed, index);
  return st;
}

CVector system_state(const CVector& psi) {
  CVector s(psi.size() / 2);
  for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = psi[2 * k];
  return s;
}

double chain_entropy(const CVector& psi, std::size_t n, LogBase base) {
  const CVector sys = system_state(psi);
  const auto side = static_cast<Eigen::Index>(std::size_t{1} << n);
  const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(sys.data(), side, side);
  const ColMatrix rhoA = M * M.adjoint();
  Eigen::SelfAdjointEigenSolver<ColMatrix> es(rhoA, Eigen::EigenvaluesOnly);
  return shannon_entropy(es.eigenvalues() / es.eigenvalues().sum(), base).value;
}

CycleReport run_cycle(CircuitState& st, const CircuitProgram& prog, const CircuitOptions& opt, bool compute_entropy) {
  const auto& reg = prog.reg;
  CycleReport rep;
  apply_layer(st.psi, prog.gates[st.P > 0 ? 0 : 1].H1, reg);
  apply_layer(st.psi, prog.gates[st.P > 0 ? 0 : 1].H2, reg);
  for (int blk = 0; blk < 2; ++blk) {
    const auto& gs = prog.gates[st.P > 0 ? 0 : 1];
    apply_gate(st.psi, blk == 0 ? gs.jump1 : gs.jump2, reg);
    const double p1 = aux_one_probability(st.psi);
    const double x = uniform01(st.rng), y = uniform01(st.rng);
    const int outcome = x < p1 ? 1 : 0;
    int recorded = outcome;
    if (opt.error_model == RecordError::miss_only) {
      if (outcome == 1 && y < opt.epsilon) recorded = 0;
    } else if (y < opt.epsilon) {
      recorded = 1 - outcome;
    }
    project_and_reset(st.psi, outcome);
    if (recorded == 1 && opt.adaptive) st.P = -st.P;
    rep.measured[static_cast<std::size_t>(blk)] = outcome;
    rep.recorded[static_cast<std::size_t>(blk)] = recorded;
  }
  if (std::abs(st.psi.norm() - 1.0) > 1e-9) throw NumericError("circuit: norm loss beyond 1e-9");
  ++st.cycle;
  rep.cycle = st.cycle;
  rep.P = st.P;
  rep.S_vN = compute_entropy ? chain_entropy(st.psi, prog.params.n, opt.base) : std::nan("");
  return rep;
}

bool is_absorbed(const CircuitState& st, const CircuitProgram& prog, double tol) {
  const auto& gs = prog.gates[st.P > 0 ? 0 : 1];
  CVector psi = st.psi;
  apply_layer(psi, gs.H1, prog.reg);
  apply_layer(psi, gs.H2, prog.reg);
  for (const auto* g : {&gs.jump1, &gs.jump2}) {
    apply_gate(psi, *g, prog.reg);
    if (aux_one_probability(psi) > tol * tol) return false;
    project_and_reset(psi, 0);
  }
  return (psi - st.psi).norm() <= tol;
}

CircuitResult run_circuit(const CircuitParams& p, std::size_t d, const CircuitOptions& opt, std::uint64_t seed,
                          std::size_t n_traj) {
  p.validate();
  if (d < 1) throw ConfigError("run_circuit: d must be at least 1");
  if (n_traj < 1) throw ConfigError("run_circuit: need at least one trajectory");
  if (!(opt.epsilon >= 0 && opt.epsilon <= 1)) throw ConfigError("run_circuit: epsilon must lie in [0, 1]");
  if (opt.record_every < 1) throw ConfigError("run_circuit: record_every must be at least 1");
  const CircuitProgram prog(p);
  // absorption is only final when the record cannot flip P spontaneously
  const bool can_stop = opt.stop_when_absorbed && (opt.error_model == RecordError::miss_only || opt.epsilon == 0.0);

  CircuitResult res;
  for (std::size_t c = 0; c <= d; c += opt.record_every) res.cycles.push_back(c);
  if (res.cycles.back() != d) res.cycles.push_back(d);
  std::vector<std::size_t> dens = opt.density_cycles;
  std::sort(dens.begin(), dens.end());
  dens.erase(std::unique(dens.begin(), dens.end()), dens.end());
  for (auto c : dens)
    if (c > d) throw ConfigError("run_circuit: density cycle beyond d");

  struct TrajOut {
    std::vector<double> S;
    std::vector<CVector> snapshots;
    std::size_t absorbed_at = 0;
  };
  auto run_one = [&](std::size_t i) {
    TrajOut out;
    CircuitState st = initial_state(prog, opt.init, seed, i);
    std::size_t si = 0, di = 0;
    double S = chain_entropy(st.psi, p.n, opt.base);
    bool absorbed = false;
    auto sample = [&](std::size_t c) {
      if (si < res.cycles.size() && res.cycles[si] == c) {
        out.S.push_back(S);
        ++si;
      }
      if (di < dens.size() && dens[di] == c) {
        out.snapshots.push_back(system_state(st.psi));
        ++di;
      }
    };
    sample(0);
    for (std::size_t c = 1; c <= d; ++c) {
      if (!absorbed) {
        const bool want = (si < res.cycles.size() && res.cycles[si] == c);
        const auto rep = run_cycle(st, prog, opt, want);
        if (want) S = rep.S_vN;
        if (can_stop && c % 8 == 0 && is_absorbed(st, prog)) {
          absorbed = true;
          out.absorbed_at = c;
          S = chain_entropy(st.psi, p.n, opt.base);
        }
      }
      sample(c);
    }
    return out;
  };

  const std::size_t dim_sys = prog.reg.dim() / 2;
  std::vector<ColMatrix> acc;
  for (std::size_t k = 0; k < dens.size(); ++k)
    acc.push_back(ColMatrix::Zero(static_cast<Eigen::Index>(dim_sys), static_cast<Eigen::Index>(dim_sys)));

  std::vector<double> sum(res.cycles.size(), 0.0), sum2(res.cycles.size(), 0.0);
  const std::size_t batch = 4 * std::max(1u, std::thread::hardware_concurrency());
  std::vector<TrajOut> outs;
  for (std::size_t start = 0; start < n_traj; start += batch) {
    const std::size_t cnt = std::min(batch, n_traj - start);
    outs.assign(cnt, {});
    parallel_for(cnt, [&](std::size_t k) { outs[k] = run_one(start + k); });
    for (std::size_t k = 0; k < cnt; ++k) {  // index order keeps sums reproducible
      const auto& o = outs[k];
      for (std::size_t s = 0; s < o.S.size(); ++s) {
        sum[s] += o.S[s];
        sum2[s] += o.S[s] * o.S[s];
      }
      for (std::size_t q = 0; q < o.snapshots.size(); ++q)
        acc[q].selfadjointView<Eigen::Lower>().rankUpdate(o.snapshots[q], 1.0 / static_cast<double>(n_traj));
      if (opt.keep_trajectories) res.trajectories.push_back(o.S);
      res.absorbed_at.push_back(o.absorbed_at);
    }
  }

  const std::string unit = opt.base == LogBase::e ? "nat" : "bit";
  res.table.columns = {{"cycle", "cycles", ColumnType::integer},
                       {"mean_S_vN", unit, ColumnType::real},
                       {"std_S_vN", unit, ColumnType::real}};
  const double N = static_cast<double>(n_traj);
  for (std::size_t s = 0; s < res.cycles.size(); ++s) {
    const double mean = sum[s] / N;
    const double var = std::max(0.0, sum2[s] / N - mean * mean);
    res.table.add_row({static_cast<std::int64_t>(res.cycles[s]), mean, std::sqrt(var)});
  }
  res.table.metadata["n_traj"] = n_traj;
  for (std::size_t k = 0; k < dens.size(); ++k) {
    ColMatrix full = acc[k].selfadjointView<Eigen::Lower>();
    res.density[dens[k]] = CMatrix(full);
  }
  return res;
}

} // namespace adq
