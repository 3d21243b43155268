#pragma once

#include <cstdint>

#include "adq/lindblad.hpp"

namespace adq {

/// Two chains of n sites coupled through a bath at site 1.
struct ChainParams {
  std::size_t n = 3;
  double J = 1.0;
  double Delta = 0.0;
  double Gamma = 1.0;
  double u = 1.0;
  double v = 0.0;

  static ChainParams from_v2(std::size_t n, double v2, double J = 1.0, double Delta = 0.0, double Gamma = 1.0);
  void validate() const;
};

struct SqueezeParams {
  int N = 2;
  double r = 0.0;
  double Gamma = 1.0;
  void validate() const;
};

struct RandomModelParams {
  std::size_t N = 4;
  std::size_t m = 2;
  double S2_target = 0.0;
  std::uint64_t seed = 0;
  bool with_aux = false;
};

struct RandomModel {
  LindbladModel model;
  CVector target_state;
  RVector schmidt;  // descending
};

inline constexpr std::size_t max_chain_sites = 12;

LindbladModel fermion_chain(const ChainParams& p);
LindbladModel spin_chain(const ChainParams& p);
LindbladModel string_spin_model(const ChainParams& p);
/// Chains plus an aux qubit (last factor) that stores the parity.
/// aux_sign = -1 replaces sigma^z_aux by -sigma^z_aux.
LindbladModel adaptive_continuous(const ChainParams& p, int aux_sign = 1);
LindbladModel squeezing_standard(const SqueezeParams& p);
/// Register {aux, S}; aux first.
LindbladModel squeezing_adaptive(const SqueezeParams& p, int aux_sign = 1);
RandomModel random_lindbladian(const RandomModelParams& p);

/// Sign-weighted XX(Z) Hamiltonian on two chains; chain_sign[0] applies to A,
/// chain_sign[1] to B.
CMatrix chain_hamiltonian(const Register& reg, std::size_t n, double J, double Delta, int sign_a, int sign_b);

/// prod_i (u - v c^dag_{A,i} c^dag_{B,i}) |0>
CVector fermion_dimer_state(const ChainParams& p);
/// prod_i (u - v s^+_{A,i} s^+_{B,i}) |0>
CVector spin_dimer_state(const ChainParams& p);
/// Kernel of S^+ + sign*tanh(r) S^-, normalized, m=+S component positive.
CVector squeezing_dark_state(int N, double r, int sign = 1);

/// Pure dimer entanglement per pair, natural log.
double pair_entropy(double u, double v);

} // namespace adq
