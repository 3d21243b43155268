#include "adq/models.hpp"

#include <algorithm>
#include <cmath>

#include "adq/rng.hpp"

namespace adq {

namespace {

std::string site(char chain, std::size_t i) { return std::string(1, chain) + std::to_string(i); }

std::vector<std::string> chain_sites(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 1; i <= n; ++i) s.push_back(site('A', i));
  for (std::size_t i = 1; i <= n; ++i) s.push_back(site('B', i));
  return s;
}

Register checked_register(const ChainParams& p, bool aux) {
  p.validate();
  if (2 * p.n > max_chain_sites)
    throw ResourceLimit("chain models: 2n = " + std::to_string(2 * p.n) + " exceeds " + std::to_string(max_chain_sites));
  return Register::two_chains(p.n, aux);
}

CVector vacuum(const Register& reg) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(reg.dim()));
  v[0] = 1.0;
  return v;
}

} // namespace

ChainParams ChainParams::from_v2(std::size_t n, double v2, double J, double Delta, double Gamma) {
  if (!(v2 >= 0.0 && v2 <= 1.0)) throw ConfigError("v^2 must lie in [0, 1]");
  ChainParams p;
  p.n = n;
  p.J = J;
  p.Delta = Delta;
  p.Gamma = Gamma;
  p.u = std::sqrt(1.0 - v2);
  p.v = std::sqrt(v2);
  return p;
}

void ChainParams::validate() const {
  if (n < 1) throw ConfigError("chain: n must be at least 1");
  if (std::abs(u * u + v * v - 1.0) > 1e-12) throw ConfigError("chain: u^2 + v^2 must equal 1");
  if (!(Gamma >= 0.0)) throw ConfigError("chain: Gamma must be non-negative");
  if (!std::isfinite(J) || !std::isfinite(Delta)) throw ConfigError("chain: J and Delta must be finite");
}

void SqueezeParams::validate() const {
  if (N < 2 || N % 2 != 0) throw ConfigError("squeezing: N must be even and at least 2");
  if (N > 30) throw ResourceLimit("squeezing: N = " + std::to_string(N) + " exceeds 30");
  if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("squeezing: r must be finite and non-negative");
  if (!(Gamma >= 0.0)) throw ConfigError("squeezing: Gamma must be non-negative");
}

CMatrix chain_hamiltonian(const Register& reg, std::size_t n, double J, double Delta, int sign_a, int sign_b) {
  const auto D = static_cast<Eigen::Index>(reg.dim());
  CMatrix H = CMatrix::Zero(D, D);
  CMatrix hop = kron(pauli::plus(), pauli::minus());
  hop += hop.adjoint().eval();
  const CMatrix zz = kron(pauli::z(), pauli::z());
  for (char c : {'A', 'B'}) {
    const double s = c == 'A' ? sign_a : sign_b;
    for (std::size_t i = 1; i < n; ++i) {
      const std::vector<std::string> bond{site(c, i), site(c, i + 1)};
      H += s * J * embed(hop, bond, reg);
      if (Delta != 0.0) H += s * Delta * embed(zz, bond, reg);
    }
  }
  return H;
}

LindbladModel fermion_chain(const ChainParams& p) {
  const Register reg = checked_register(p, false);
  const FermionMap map = FermionMap::canonical(reg);
  std::vector<CMatrix> c;
  for (std::size_t i = 1; i <= 2 * p.n; ++i) c.push_back(jw_annihilation(i, map));
  auto cA = [&](std::size_t i) -> const CMatrix& { return c[i - 1]; };
  auto cB = [&](std::size_t i) -> const CMatrix& { return c[p.n + i - 1]; };

  const auto D = static_cast<Eigen::Index>(reg.dim());
  CMatrix H = CMatrix::Zero(D, D);
  for (int s : {0, 1}) {
    const double sg = s == 0 ? 1.0 : -1.0;
    for (std::size_t i = 1; i < p.n; ++i) {
      const CMatrix& ci = s == 0 ? cA(i) : cB(i);
      const CMatrix& cj = s == 0 ? cA(i + 1) : cB(i + 1);
      const CMatrix hop = ci.adjoint() * cj;
      H += sg * p.J * (hop + hop.adjoint());
      H += sg * p.Delta * (ci.adjoint() * ci) * (cj.adjoint() * cj);
    }
  }
  LindbladModel m;
  m.name = "fermion_chain";
  m.reg = reg;
  m.H = H;
  m.jumps.push_back({p.u * cA(1) + p.v * cB(1).adjoint(), p.Gamma});
  m.jumps.push_back({p.u * cB(1) - p.v * cA(1).adjoint(), p.Gamma});
  return m;
}

LindbladModel spin_chain(const ChainParams& p) {
  const Register reg = checked_register(p, false);
  LindbladModel m;
  m.name = "spin_chain";
  m.reg = reg;
  m.H = chain_hamiltonian(reg, p.n, p.J, p.Delta, +1, -1);
  m.jumps.push_back({p.u * embed(pauli::minus(), "A1", reg) + p.v * embed(pauli::plus(), "B1", reg), p.Gamma});
  m.jumps.push_back({p.u * embed(pauli::minus(), "B1", reg) + p.v * embed(pauli::plus(), "A1", reg), p.Gamma});
  return m;
}

LindbladModel string_spin_model(const ChainParams& p) {
  if (p.Delta != 0.0) throw ConfigError("string_spin_model: only Delta = 0 is supported");
  const Register reg = checked_register(p, false);
  const CMatrix P = total_parity(reg, chain_sites(p.n));
  LindbladModel m;
  m.name = "string_spin_model";
  m.reg = reg;
  m.H = chain_hamiltonian(reg, p.n, p.J, 0.0, +1, -1);
  m.jumps.push_back({p.u * embed(pauli::minus(), "A1", reg) - p.v * embed(pauli::plus(), "B1", reg) * P, p.Gamma});
  m.jumps.push_back({p.u * embed(pauli::minus(), "B1", reg) * P - p.v * embed(pauli::plus(), "A1", reg), p.Gamma});
  return m;
}

LindbladModel adaptive_continuous(const ChainParams& p, int aux_sign) {
  if (aux_sign != 1 && aux_sign != -1) throw ConfigError("adaptive_continuous: aux_sign must be +1 or -1");
  const Register reg = checked_register(p, true);
  const CMatrix X = embed(pauli::x(), "aux", reg);
  const CMatrix Z = static_cast<double>(aux_sign) * embed(pauli::z(), "aux", reg);
  LindbladModel m;
  m.name = "adaptive_continuous";
  m.reg = reg;
  m.H = chain_hamiltonian(reg, p.n, p.J, p.Delta, +1, -1);
  m.jumps.push_back({X * (p.u * embed(pauli::minus(), "A1", reg) + p.v * embed(pauli::plus(), "B1", reg) * Z), p.Gamma});
  m.jumps.push_back({X * (p.u * embed(pauli::minus(), "B1", reg) * Z + p.v * embed(pauli::plus(), "A1", reg)), p.Gamma});
  return m;
}

LindbladModel squeezing_standard(const SqueezeParams& p) {
  p.validate();
  const DickeOperators ops = dicke_operators(p.N);
  LindbladModel m;
  m.name = "squeezing_standard";
  m.reg = DickeSpace{p.N}.as_register();
  m.H = CMatrix::Zero(ops.z.rows(), ops.z.cols());
  m.jumps.push_back({ops.plus + std::tanh(p.r) * ops.minus, p.Gamma});
  return m;
}

LindbladModel squeezing_adaptive(const SqueezeParams& p, int aux_sign) {
  p.validate();
  if (aux_sign != 1 && aux_sign != -1) throw ConfigError("squeezing_adaptive: aux_sign must be +1 or -1");
  const DickeOperators ops = dicke_operators(p.N);
  LindbladModel m;
  m.name = "squeezing_adaptive";
  m.reg = Register({{"aux", 2}, {"S", static_cast<std::size_t>(ops.z.rows())}});
  const CMatrix xz = pauli::x() * (static_cast<double>(aux_sign) * pauli::z());
  m.jumps.push_back({kron(pauli::x(), ops.plus) + std::tanh(p.r) * kron(xz, ops.minus), p.Gamma});
  m.H = CMatrix::Zero(m.jumps[0].op.rows(), m.jumps[0].op.cols());
  return m;
}

CVector fermion_dimer_state(const ChainParams& p) {
  const Register reg = checked_register(p, false);
  const FermionMap map = FermionMap::canonical(reg);
  CVector psi = vacuum(reg);
  for (std::size_t i = 1; i <= p.n; ++i) {
    const CMatrix pair = jw_annihilation(i, map).adjoint() * jw_annihilation(p.n + i, map).adjoint();
    psi = (p.u * psi - p.v * (pair * psi)).eval();
  }
  return psi.normalized();
}

CVector spin_dimer_state(const ChainParams& p) {
  const Register reg = checked_register(p, false);
  CVector psi = vacuum(reg);
  for (std::size_t i = 1; i <= p.n; ++i) {
    const CMatrix pair = embed(kron(pauli::plus(), pauli::plus()), {site('A', i), site('B', i)}, reg);
    psi = (p.u * psi - p.v * (pair * psi)).eval();
  }
  return psi.normalized();
}

CVector squeezing_dark_state(int N, double r, int sign) {
  SqueezeParams{N, r, 1.0}.validate();
  const DickeOperators ops = dicke_operators(N);
  const auto ker = null_space(ops.plus + static_cast<double>(sign) * std::tanh(r) * ops.minus);
  if (ker.size() != 1) throw NumericError("squeezing_dark_state: kernel dimension " + std::to_string(ker.size()));
  CVector v = ker.front();
  v *= std::abs(v[0]) > 0 ? std::conj(v[0]) / std::abs(v[0]) : cplx(1);
  return v.normalized();
}

double pair_entropy(double u, double v) {
  double s = 0;
  for (double c : {u * u, v * v})
    if (c > 0) s -= c * std::log(c);
  return s;
}

namespace {

double renyi2(const RVector& p) { return -std::log(p.squaredNorm()); }

RVector schmidt_probabilities(std::size_t N, double target, std::mt19937_64& g) {
  std::exponential_distribution<double> ex(1.0);
  RVector p(static_cast<Eigen::Index>(N));
  for (auto& x : p) x = ex(g);
  p /= p.sum();
  const double s0 = renyi2(p);
  RVector anchor;
  if (s0 < target) {
    anchor = RVector::Constant(static_cast<Eigen::Index>(N), 1.0 / static_cast<double>(N));
  } else {
    Eigen::Index k = 0;
    p.maxCoeff(&k);
    anchor = RVector::Unit(static_cast<Eigen::Index>(N), k);
  }
  auto at = [&](double lam) -> RVector { return (1.0 - lam) * p + lam * anchor; };
  const double s_end = renyi2(anchor);
  if ((s0 - target) * (s_end - target) > 0 && std::abs(s_end - target) > 1e-12)
    throw NumericError("random_lindbladian: bisection cannot bracket the Renyi-2 target");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = renyi2(at(mid));
    if ((s < target) == (s0 < target)) lo = mid;
    else hi = mid;
  }
  RVector out = at(0.5 * (lo + hi));
  if (std::abs(renyi2(out) - target) > 1e-6)
    throw NumericError("random_lindbladian: bisection missed the Renyi-2 target");
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

CMatrix ginibre(std::size_t N, std::mt19937_64& g) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double re = nd(g), im = nd(g);
      A(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return A;
}

} // namespace

RandomModel random_lindbladian(const RandomModelParams& p) {
  if (p.N < 2) throw ConfigError("random_lindbladian: N must be at least 2");
  if (p.N > 8) throw ResourceLimit("random_lindbladian: N = " + std::to_string(p.N) + " exceeds 8");
  if (p.m < 2) throw ConfigError("random_lindbladian: m must be at least 2");
  const double lnN = std::log(static_cast<double>(p.N));
  if (!(p.S2_target > 0.0 && p.S2_target <= lnN + 1e-12))
    throw ConfigError("random_lindbladian: S2 target must lie in (0, ln N]");

  auto g = make_stream(p.seed, 0);
  RandomModel out;
  out.schmidt = schmidt_probabilities(p.N, std::min(p.S2_target, lnN), g).cwiseSqrt();

  const auto n = static_cast<Eigen::Index>(p.N);
  const CMatrix Id = CMatrix::Identity(n, n);
  const RVector& psi = out.schmidt;
  CVector target = CVector::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) target[i * n + i] = psi[i];

  Register reg = p.with_aux ? Register({{"aux", 2}, {"A", p.N}, {"B", p.N}}) : Register({{"A", p.N}, {"B", p.N}});
  LindbladModel m;
  m.name = p.with_aux ? "random_lindbladian_aux" : "random_lindbladian";
  m.reg = reg;
  m.H = CMatrix::Zero(static_cast<Eigen::Index>(reg.dim()), static_cast<Eigen::Index>(reg.dim()));
  CMatrix iy(2, 2);
  iy << 0, 1, -1, 0;
  for (std::size_t mu = 0; mu < p.m; ++mu) {
    const CMatrix A = ginibre(p.N, g);
    // Psi A^T Psi^{-1}: transpose in the Schmidt basis
    CMatrix B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) B(i, j) = A(j, i) * psi[i] / psi[j];
    if (p.with_aux)
      m.jumps.push_back({kron(pauli::x(), kron(A, Id)) + kron(iy, kron(Id, B)), 1.0});
    else
      m.jumps.push_back({kron(A, Id) - kron(Id, B), 1.0});
  }
  if (p.with_aux) {
    CVector t = CVector::Zero(2 * n * n);
    t.head(n * n) = target;
    out.target_state = t;
  } else {
    out.target_state = target;
  }
  out.model = std::move(m);
  return out;
}

} // namespace adq
