#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adq/hilbert.hpp"

namespace adq {

struct Jump {
  CMatrix op;
  double rate = 1.0;
};

/// d rho/dt = -i[H, rho] + sum_mu rate_mu (L rho L^dag - {L^dag L, rho}/2)
struct LindbladModel {
  std::string name;
  CMatrix H;
  std::vector<Jump> jumps;
  Register reg;

  std::size_t dim() const { return reg.dim(); }
  /// Throws ConfigError on shape mismatch, negative rates, or non-Hermitian H.
  void validate() const;
};

/// Column-stacking convention: vec(rho)[i + j*D] = rho(i, j), so that
/// vec(A rho B) = (B^T kron A) vec(rho).
struct Superoperator {
  SparseCMatrix matrix;
  std::size_t dim = 0;  // D, the Hilbert-space dimension
};

CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v, std::size_t D);

Superoperator build_superoperator(const LindbladModel& m);
CMatrix dense(const Superoperator& s);

/// Apply the generator to rho directly in matrix form.
CMatrix apply_lindbladian(const LindbladModel& m, const CMatrix& rho);

struct SpectralData {
  CVector eigenvalues;                 // descending real part
  std::optional<double> gap;           // empty when nothing relaxes
  double ztol = 0.0;
  std::vector<CVector> zero_modes;     // vec(rho) kernel vectors, unit norm
  std::vector<CMatrix> steady_states;  // Hermitian, unit trace
  std::vector<std::size_t> block_sizes;

  bool degenerate() const { return zero_modes.size() > 1; }
};

/// Splits the superoperator into the connected components of its sparsity
/// graph and diagonalizes each block densely. ztol defaults to 1e-9 max|lambda|.
SpectralData spectral_data(const Superoperator& s, std::optional<double> ztol = std::nullopt,
                           bool want_zero_modes = true);

class DegenerateKernel : public NumericError {
public:
  DegenerateKernel(std::size_t d)
      : NumericError("dark-state subspace has dimension " + std::to_string(d) + ", pure steady state not unique"),
        dimension(d) {}
  std::size_t dimension;
};

struct DarkSubspace {
  std::vector<CVector> basis;  // orthonormal, annihilated by every jump, H-invariant
  std::vector<double> energies; // H eigenvalues of the basis vectors
};

DarkSubspace dark_subspace(const LindbladModel& m, double tol = default_policy.null_rel_tol);

/// The unique pure steady state, if one exists. Throws DegenerateKernel when
/// the dark subspace is more than one-dimensional.
std::optional<CVector> steady_state_dark(const LindbladModel& m);

struct EvolveOptions {
  std::size_t spectral_max_side = 4096;  // D^2 threshold for the spectral backend
  double rk_tol = 1e-11;
  double min_step = 1e-9;
};

std::vector<CMatrix> evolve(const LindbladModel& m, const CMatrix& rho0, const std::vector<double>& times,
                            const EvolveOptions& opt = {});

double fidelity(const CMatrix& rho, const CVector& psi);

/// <(L+L^dag)^2> - <L+L^dag>^2 at a dark state of L.
double variance_rate_bound(const CMatrix& L, const CVector& psi);

} // namespace adq
