#include "adq/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "adq/models.hpp"

namespace adq {

namespace {
using ColMatrix = Eigen::MatrixXcd;
constexpr double prob_floor = 1e-14;
} // namespace

double Entropy::nats() const { return base == LogBase::e ? value : value * std::log(2.0); }
double Entropy::bits() const { return base == LogBase::two ? value : value / std::log(2.0); }

SchmidtSpectrum schmidt_spectrum(const CVector& psi, const std::vector<std::string>& part_a, const Register& reg) {
  if (part_a.empty() || part_a.size() >= reg.size()) throw ConfigError("schmidt_spectrum: invalid bipartition");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ConfigError("schmidt_spectrum: state not normalized");
  const CMatrix M = bipartite_matrix(psi, part_a, reg);
  Eigen::BDCSVD<ColMatrix> svd(M);
  SchmidtSpectrum s{svd.singularValues()};
  s.coefficients /= s.coefficients.norm();
  return s;
}

Entropy shannon_entropy(const RVector& p, LogBase base) {
  double h = 0;
  for (double x : p)
    if (x > prob_floor) h -= x * std::log(x);
  return Entropy{h, LogBase::e}.in(base);
}

Entropy entanglement_entropy(const CVector& psi, const std::vector<std::string>& part_a, const Register& reg,
                             LogBase base) {
  const auto s = schmidt_spectrum(psi, part_a, reg);
  return shannon_entropy(s.coefficients.cwiseAbs2(), base);
}

Entropy von_neumann_entropy(const CMatrix& rho, LogBase base) {
  Eigen::SelfAdjointEigenSolver<ColMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return shannon_entropy(es.eigenvalues(), base);
}

Renyi2 renyi2_and_deltaE2(const CMatrix& rhoA, std::size_t N) {
  if (N < 1 || static_cast<std::size_t>(rhoA.rows()) != N) throw ConfigError("renyi2: local dimension mismatch");
  if (std::abs(rhoA.trace() - cplx(1)) > 1e-8) throw ConfigError("renyi2: trace deviates from 1");
  const double purity = std::real((rhoA * rhoA).trace());
  Renyi2 r;
  r.S2 = -std::log(purity);
  r.deltaE2 = std::max(0.0, purity - 1.0 / static_cast<double>(N));
  return r;
}

double log_negativity(const CMatrix& rho, const std::vector<std::string>& part_a, const Register& reg) {
  if (part_a.empty() || part_a.size() >= reg.size()) throw ConfigError("log_negativity: invalid bipartition");
  return std::log2(trace_norm(partial_transpose(rho, part_a, reg)));
}

SpinMoments& SpinMoments::operator+=(const SpinMoments& o) {
  for (int a = 0; a < 3; ++a) {
    mean[a] += o.mean[a];
    for (int b = 0; b < 3; ++b) second[a][b] += o.second[a][b];
  }
  return *this;
}

SpinMoments SpinMoments::scaled(double f) const {
  SpinMoments s = *this;
  for (int a = 0; a < 3; ++a) {
    s.mean[a] *= f;
    for (int b = 0; b < 3; ++b) s.second[a][b] *= f;
  }
  return s;
}

SpinMoments spin_moments(const CMatrix& rho, int N) {
  const DickeOperators ops = dicke_operators(N);
  if (rho.rows() != ops.z.rows()) throw ConfigError("spin_moments: state is not in the Dicke space of N");
  const CMatrix* S[3] = {&ops.x, &ops.y, &ops.z};
  SpinMoments m;
  for (int a = 0; a < 3; ++a) {
    m.mean[a] = std::real((*S[a] * rho).trace());
    for (int b = a; b < 3; ++b) {
      const CMatrix ab = *S[a] * *S[b];
      m.second[a][b] = m.second[b][a] = std::real(((ab + ab.adjoint()) * rho).trace()) * 0.5;
    }
  }
  return m;
}

SpinMoments spin_moments(const CVector& psi, int N) { return spin_moments(CMatrix(psi * psi.adjoint()), N); }

double wineland(const SpinMoments& m, int N) {
  const double len2 = m.mean[0] * m.mean[0] + m.mean[1] * m.mean[1] + m.mean[2] * m.mean[2];
  if (std::sqrt(len2) < 1e-10) return wineland_undefined;
  const double var = m.second[0][0] - m.mean[0] * m.mean[0];
  return static_cast<double>(N) * var / len2;
}

double wineland(const CVector& psi, int N) { return wineland(spin_moments(psi, N), N); }
double wineland(const CMatrix& rho, int N) { return wineland(spin_moments(rho, N), N); }

WinelandReport wineland_report(const SpinMoments& m, int N) {
  WinelandReport w;
  const Eigen::Vector3d s(m.mean[0], m.mean[1], m.mean[2]);
  w.mean_spin = s.norm();
  w.xi2_x = wineland(m, N);
  if (w.mean_spin < 1e-10) {
    w.xi2_min = wineland_undefined;
    return w;
  }
  Eigen::Matrix3d cov;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) cov(a, b) = m.second[a][b] - m.mean[a] * m.mean[b];
  const Eigen::Vector3d n = s / w.mean_spin;
  Eigen::Vector3d helper = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (helper - helper.dot(n) * n).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  Eigen::Matrix2d c;
  c << e1.dot(cov * e1), e1.dot(cov * e2), e2.dot(cov * e1), e2.dot(cov * e2);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c).eigenvalues().minCoeff();
  w.xi2_min = static_cast<double>(N) * lmin / (w.mean_spin * w.mean_spin);
  return w;
}

QfiResult qfi_check(const CVector& psi, int N, double r) {
  const DickeOperators ops = dicke_operators(N);
  if (psi.size() != ops.z.rows()) throw ConfigError("qfi_check: state is not in the Dicke space of N");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ConfigError("qfi_check: state not normalized");
  if ((ops.plus * psi + std::tanh(r) * (ops.minus * psi)).norm() > 1e-8)
    throw ConfigError("qfi_check: state is not annihilated by the squeezing jump");
  const CMatrix Jy = ops.y / spin_convention;
  const CVector Jp = Jy * psi;
  const double mean = std::real(psi.dot(Jp));
  QfiResult q;
  q.F_Q = 4.0 * (Jp.squaredNorm() - mean * mean);
  q.xi2 = wineland(psi, N);
  return q;
}

FitResult fit_relaxation(const std::vector<double>& d, const std::vector<double>& S) {
  if (d.size() != S.size()) throw ConfigError("fit_relaxation: series length mismatch");
  if (d.size() < 8) throw ConfigError("fit_relaxation: need at least 8 points");
  for (std::size_t k = 1; k < d.size(); ++k)
    if (!(d[k] > d[k - 1])) throw ConfigError("fit_relaxation: d must be strictly increasing");
  const auto [smin, smax] = std::minmax_element(S.begin(), S.end());
  if (*smax - *smin <= 1e-14 * std::max(1.0, std::abs(*smax)))
    throw NumericError("fit_relaxation: degenerate (constant) series");

  auto amp_sse = [&](double xi, double& a) {
    double sf = 0, ff = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double f = -std::expm1(-d[k] / xi);
      sf += S[k] * f;
      ff += f * f;
    }
    a = ff > 0 ? sf / ff : 0.0;
    double sse = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double e = S[k] - a * -std::expm1(-d[k] / xi);
      sse += e * e;
    }
    return sse;
  };

  double spacing = d.back() - d.front();
  for (std::size_t k = 1; k < d.size(); ++k) spacing = std::min(spacing, d[k] - d[k - 1]);
  const double lo = std::log(1e-3 * spacing), hi = std::log(1e3 * std::max(std::abs(d.back()), spacing));
  // coarse scan, then golden-section refinement around the best bracket
  constexpr int grid = 400;
  double best = std::numeric_limits<double>::infinity();
  int ibest = 0;
  for (int k = 0; k <= grid; ++k) {
    double a;
    const double sse = amp_sse(std::exp(lo + (hi - lo) * k / grid), a);
    if (sse < best) {
      best = sse;
      ibest = k;
    }
  }
  double x0 = lo + (hi - lo) * std::max(0, ibest - 1) / grid;
  double x1 = lo + (hi - lo) * std::min(grid, ibest + 1) / grid;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = x1 - gr * (x1 - x0), e = x0 + gr * (x1 - x0), a;
  double fc = amp_sse(std::exp(c), a), fe = amp_sse(std::exp(e), a);
  for (int it = 0; it < 200 && x1 - x0 > 1e-12; ++it) {
    if (fc < fe) {
      x1 = e; e = c; fe = fc;
      c = x1 - gr * (x1 - x0);
      fc = amp_sse(std::exp(c), a);
    } else {
      x0 = c; c = e; fc = fe;
      e = x0 + gr * (x1 - x0);
      fe = amp_sse(std::exp(e), a);
    }
  }
  FitResult fit;
  fit.xi = std::exp(0.5 * (x0 + x1));
  fit.residual = std::sqrt(amp_sse(fit.xi, fit.amplitude));
  return fit;
}

MixedSqueezingRatio mixed_squeezing_ratio(double alpha, double r, int N) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("mixed_squeezing_ratio: alpha must lie in [0, 1]");
  MixedSqueezingRatio out;
  out.closed_form = 1.0 + (std::exp(4.0 * r) - 1.0) * alpha;
  const CVector X = squeezing_dark_state(N, r, +1);
  const CVector Y = squeezing_dark_state(N, r, -1);
  const CMatrix rho = (1.0 - alpha) * projector(X) + alpha * projector(Y);
  out.direct = wineland(rho, N) / wineland(X, N);
  return out;
}

} // namespace adq
