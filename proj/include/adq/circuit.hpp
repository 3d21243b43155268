#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "adq/analysis.hpp"
#include "adq/result_table.hpp"

namespace adq {

struct CircuitParams {
  std::size_t n = 2;
  double J = 1.0;
  double u = 1.0;
  double v = 0.0;
  double theta = 1.0;            // common scale of every gate exponent
  bool signed_hopping = false;   // true: chain B hops with -J

  static CircuitParams from_v2(std::size_t n, double v2, double J = 1.0);
  void validate() const;
};

/// Unitary on the listed register positions (first = most significant).
struct LocalGate {
  std::vector<std::size_t> qubits;
  CMatrix U;
};

struct GateLayer {
  std::vector<LocalGate> gates;  // mutually disjoint supports
  CMatrix dense(const Register& reg) const;
};

struct CircuitGates {
  GateLayer H1, H2;        // odd and even bonds
  LocalGate jump1, jump2;  // on (aux, X1, Y1): X = A for jump1, X = B for jump2
};

/// Register used by the circuit: A1..An, B1..Bn, aux.
Register circuit_register(std::size_t n);

CircuitGates build_gates(const CircuitParams& p, int P);

void apply_gate(CVector& psi, const LocalGate& g, const Register& reg);
void apply_layer(CVector& psi, const GateLayer& layer, const Register& reg);

enum class RecordError { miss_only, symmetric };
enum class CircuitInit { b_excited, all_zero };

struct CircuitOptions {
  bool adaptive = true;
  double epsilon = 0.0;
  RecordError error_model = RecordError::miss_only;
  CircuitInit init = CircuitInit::b_excited;
  LogBase base = LogBase::e;
  std::size_t record_every = 1;          // entropy sampled every k cycles (and at d)
  std::vector<std::size_t> density_cycles;  // ensemble density accumulated here
  bool keep_trajectories = false;
  bool stop_when_absorbed = true;        // exact shortcut once the state is a fixed point
};

struct CircuitState {
  CVector psi;
  int P = 1;
  std::size_t cycle = 0;
  std::mt19937_64 rng;
};

struct CycleReport {
  std::size_t cycle = 0;
  std::array<int, 2> measured{0, 0};
  std::array<int, 2> recorded{0, 0};
  int P = 1;
  double S_vN = 0.0;
  bool operator==(const CycleReport&) const = default;
};

/// Gate sets for P = +1 (index 0) and P = -1 (index 1).
struct CircuitProgram {
  CircuitParams params;
  Register reg;
  std::array<CircuitGates, 2> gates;
  explicit CircuitProgram(const CircuitParams& p);
};

CircuitState initial_state(const CircuitProgram& prog, CircuitInit init, std::uint64_t seed, std::uint64_t index);

/// One cycle: H1, H2, then for each jump block the gate, aux measurement,
/// record (possibly corrupted), parity update, reset of aux.
CycleReport run_cycle(CircuitState& st, const CircuitProgram& prog, const CircuitOptions& opt,
                      bool compute_entropy = true);

/// System amplitudes with the aux qubit in |0>.
CVector system_state(const CVector& psi);
double chain_entropy(const CVector& psi, std::size_t n, LogBase base = LogBase::e);
/// True when a further cycle would leave the state unchanged with certainty.
bool is_absorbed(const CircuitState& st, const CircuitProgram& prog, double tol = 1e-13);

struct CircuitResult {
  ResultTable table;                                  // cycle, mean_S_vN, std_S_vN
  std::vector<std::size_t> cycles;                    // sampled cycles
  std::vector<std::vector<double>> trajectories;      // [traj][sample], when kept
  std::map<std::size_t, CMatrix> density;             // ensemble system density
  std::vector<std::size_t> absorbed_at;               // cycle of absorption, 0 if never
};

CircuitResult run_circuit(const CircuitParams& p, std::size_t d, const CircuitOptions& opt, std::uint64_t seed,
                          std::size_t n_traj);

inline constexpr std::size_t max_circuit_qubits = 13;

} // namespace adq
