#pragma once

#include <limits>
#include <string>
#include <vector>

#include "adq/hilbert.hpp"

namespace adq {

enum class LogBase { e, two };

/// Entropy value carrying its logarithm base.
struct Entropy {
  double value = 0.0;
  LogBase base = LogBase::e;

  double nats() const;
  double bits() const;
  Entropy in(LogBase b) const { return {b == LogBase::e ? nats() : bits(), b}; }
};

struct SchmidtSpectrum {
  RVector coefficients;  // descending, sum of squares 1
};

SchmidtSpectrum schmidt_spectrum(const CVector& psi, const std::vector<std::string>& part_a, const Register& reg);

/// Shannon entropy of a probability vector; entries below 1e-14 are dropped.
Entropy shannon_entropy(const RVector& p, LogBase base = LogBase::e);

Entropy entanglement_entropy(const CVector& psi, const std::vector<std::string>& part_a, const Register& reg,
                             LogBase base = LogBase::e);

/// Von Neumann entropy of a density matrix.
Entropy von_neumann_entropy(const CMatrix& rho, LogBase base = LogBase::e);

struct Renyi2 {
  double S2 = 0.0;       // natural log
  double deltaE2 = 0.0;  // exp(-S2) - 1/N
};

Renyi2 renyi2_and_deltaE2(const CMatrix& rhoA, std::size_t N);

/// log2 of the trace norm of the partial transpose over part_a.
double log_negativity(const CMatrix& rho, const std::vector<std::string>& part_a, const Register& reg);

/// First and second moments of the stored spin operators (sum-of-Pauli scale).
struct SpinMoments {
  double mean[3] = {0, 0, 0};
  double second[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};  // <{S_a, S_b}>/2

  SpinMoments& operator+=(const SpinMoments& o);
  SpinMoments scaled(double f) const;
};

SpinMoments spin_moments(const CMatrix& rho, int N);
SpinMoments spin_moments(const CVector& psi, int N);

inline constexpr double wineland_undefined = std::numeric_limits<double>::infinity();

/// N var(S_x) / |<S>|^2; +infinity when |<S>| < 1e-10.
double wineland(const SpinMoments& m, int N);
double wineland(const CVector& psi, int N);
double wineland(const CMatrix& rho, int N);

struct WinelandReport {
  double xi2_x = 0.0;    // x quadrature
  double xi2_min = 0.0;  // best quadrature orthogonal to the mean spin
  double mean_spin = 0.0;
};

WinelandReport wineland_report(const SpinMoments& m, int N);

struct QfiResult {
  double F_Q = 0.0;
  double xi2 = 0.0;
};

/// Pure dark state of S^+ + tanh(r) S^-; F_Q = 4 var(J^y) with J the ladder generators.
QfiResult qfi_check(const CVector& psi, int N, double r);

struct FitResult {
  double amplitude = 0.0;
  double xi = 0.0;
  double residual = 0.0;  // Euclidean norm of the residual vector
};

/// Least squares of S(d) = a (1 - exp(-d/xi)).
FitResult fit_relaxation(const std::vector<double>& d, const std::vector<double>& S);

struct MixedSqueezingRatio {
  double closed_form = 1.0;
  double direct = 1.0;
};

/// xi^2 of (1-alpha)|X><X| + alpha|Y><Y| relative to alpha = 0, along x.
MixedSqueezingRatio mixed_squeezing_ratio(double alpha, double r, int N);

} // namespace adq
