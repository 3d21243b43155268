#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "adq/numkernel.hpp"

namespace adq {

/// Ratio of the stored S^{x,y,z} (sum of Pauli matrices) to the ladder-normalized
/// generators J^{x,y,z}. Jump operators use the ladder normalization.
inline constexpr double spin_convention = 2.0;

namespace pauli {
// Basis |0>, |1>. |0> is the ground state: sigma^z|0> = +|0>, sigma^-|1> = |0>.
CMatrix id();
CMatrix x();
CMatrix y();
CMatrix z();
CMatrix plus();   // |1><0|
CMatrix minus();  // |0><1|
CMatrix number(); // |1><1| = (1 - sigma^z)/2
} // namespace pauli

struct Factor {
  std::string label;
  std::size_t dim = 2;
};

/// Ordered tensor factors. Factor 0 is the leftmost Kronecker factor, so it
/// carries the most significant digit of a basis index.
class Register {
public:
  Register() = default;
  explicit Register(std::vector<Factor> factors);

  static Register qubits(const std::vector<std::string>& labels);
  /// A1..An, B1..Bn, then "aux" when requested.
  static Register two_chains(std::size_t n, bool with_aux = false);

  std::size_t size() const { return factors_.size(); }
  std::size_t dim() const { return dim_; }
  const Factor& factor(std::size_t pos) const { return factors_.at(pos); }
  const std::vector<Factor>& factors() const { return factors_; }
  std::vector<std::string> labels() const;

  bool contains(std::string_view label) const;
  std::size_t position(std::string_view label) const;  // throws ConfigError when absent
  std::size_t stride(std::size_t pos) const { return strides_.at(pos); }
  std::size_t digit(std::size_t index, std::size_t pos) const {
    return (index / strides_[pos]) % factors_[pos].dim;
  }

  bool operator==(const Register& o) const;

private:
  std::vector<Factor> factors_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 1;
};

using QubitRegister = Register;

/// Symmetric subspace of N spins-1/2; basis index k = 0..N has m = N/2 - k.
struct DickeSpace {
  int N = 0;
  std::size_t dim() const { return static_cast<std::size_t>(N) + 1; }
  double S() const { return 0.5 * N; }
  Register as_register(std::string label = "S") const;
};

struct DickeOperators {
  CMatrix plus, minus;  // ladder normalization
  CMatrix x, y, z;      // sum-of-Pauli normalization, z = diag(N - 2k)
};

DickeOperators dicke_operators(int N);

/// Identity on every factor not listed; op acts on the listed factors in the
/// order given.
CMatrix embed(const CMatrix& op, const std::vector<std::string>& sites, const Register& reg);
CMatrix embed(const CMatrix& op, const std::string& site, const Register& reg);
// a braced list of labels would otherwise also match std::string's iterator-pair constructor
inline CMatrix embed(const CMatrix& op, std::initializer_list<std::string> sites, const Register& reg) {
  return embed(op, std::vector<std::string>(sites), reg);
}

struct FermionMap {
  Register reg;
  std::vector<std::size_t> ordering;  // register positions, string runs over earlier entries

  /// Every qubit factor except those labelled "aux", in register order.
  static FermionMap canonical(const Register& reg);
};

/// (prod_{j<i} sigma^z_j) sigma^-_i, i counted from 1 along map.ordering.
CMatrix jw_annihilation(std::size_t i, const FermionMap& map);

/// (-1)^n over the listed qubit sites (all factors when empty).
CMatrix total_parity(const Register& reg, const std::vector<std::string>& sites = {});
/// Diagonal of total_parity as +-1 values.
std::vector<int> parity_diagonal(const Register& reg, const std::vector<std::string>& sites = {});

CMatrix partial_trace(const CMatrix& rho, const std::vector<std::string>& keep, const Register& reg);
CMatrix partial_transpose(const CMatrix& rho, const std::vector<std::string>& subsystem, const Register& reg);

/// Amplitudes reshaped to a (dim_A x dim_B) matrix, A = listed factors in
/// register order, B = the rest.
CMatrix bipartite_matrix(const CVector& psi, const std::vector<std::string>& part_a, const Register& reg);

/// |psi><psi|
CMatrix projector(const CVector& psi);

} // namespace adq
