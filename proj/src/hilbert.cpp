#include "adq/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace adq {

namespace pauli {
CMatrix id() { return CMatrix::Identity(2, 2); }
CMatrix x() { CMatrix m(2, 2); m << 0, 1, 1, 0; return m; }
CMatrix y() { CMatrix m(2, 2); m << 0, -I_unit, I_unit, 0; return m; }
CMatrix z() { CMatrix m(2, 2); m << 1, 0, 0, -1; return m; }
CMatrix plus() { CMatrix m(2, 2); m << 0, 0, 1, 0; return m; }
CMatrix minus() { CMatrix m(2, 2); m << 0, 1, 0, 0; return m; }
CMatrix number() { CMatrix m(2, 2); m << 0, 0, 0, 1; return m; }
} // namespace pauli

Register::Register(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dim < 1) throw ConfigError("register: factor '" + f.label + "' has zero dimension");
    if (!seen.insert(f.label).second) throw ConfigError("register: duplicate label '" + f.label + "'");
  }
  strides_.assign(factors_.size(), 1);
  dim_ = 1;
  for (std::size_t k = factors_.size(); k-- > 0;) {
    strides_[k] = dim_;
    dim_ *= factors_[k].dim;
  }
}

Register Register::qubits(const std::vector<std::string>& labels) {
  std::vector<Factor> f;
  for (const auto& l : labels) f.push_back({l, 2});
  return Register(std::move(f));
}

Register Register::two_chains(std::size_t n, bool with_aux) {
  if (n < 1) throw ConfigError("two_chains: n must be at least 1");
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back("A" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) labels.push_back("B" + std::to_string(i));
  if (with_aux) labels.push_back("aux");
  return qubits(labels);
}

std::vector<std::string> Register::labels() const {
  std::vector<std::string> out;
  for (const auto& f : factors_) out.push_back(f.label);
  return out;
}

bool Register::contains(std::string_view label) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t Register::position(std::string_view label) const {
  for (std::size_t k = 0; k < factors_.size(); ++k)
    if (factors_[k].label == label) return k;
  throw ConfigError("register: unknown label '" + std::string(label) + "'");
}

bool Register::operator==(const Register& o) const {
  if (factors_.size() != o.factors_.size()) return false;
  for (std::size_t k = 0; k < factors_.size(); ++k)
    if (factors_[k].label != o.factors_[k].label || factors_[k].dim != o.factors_[k].dim) return false;
  return true;
}

Register DickeSpace::as_register(std::string label) const {
  if (N < 1) throw ConfigError("DickeSpace: N must be at least 1");
  return Register({{std::move(label), dim()}});
}

DickeOperators dicke_operators(int N) {
  if (N < 1) throw ConfigError("dicke_operators: N must be at least 1");
  const Eigen::Index d = N + 1;
  const double S = 0.5 * N;
  DickeOperators ops;
  ops.plus = CMatrix::Zero(d, d);
  ops.z = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double m = S - static_cast<double>(k);
    ops.z(k, k) = spin_convention * m;
    // J+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> has index k-1
    if (k > 0) ops.plus(k - 1, k) = std::sqrt(S * (S + 1) - m * (m + 1));
  }
  ops.minus = ops.plus.adjoint();
  ops.x = ops.plus + ops.minus;
  ops.y = -I_unit * (ops.plus - ops.minus);
  return ops;
}

namespace {

std::vector<std::size_t> positions_of(const std::vector<std::string>& labels, const Register& reg) {
  std::vector<std::size_t> pos;
  std::set<std::size_t> seen;
  for (const auto& l : labels) {
    const std::size_t p = reg.position(l);
    if (!seen.insert(p).second) throw ConfigError("duplicate site '" + l + "'");
    pos.push_back(p);
  }
  return pos;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& pos, const Register& reg) {
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < reg.size(); ++k)
    if (std::find(pos.begin(), pos.end(), k) == pos.end()) rest.push_back(k);
  return rest;
}

// Offsets into the full index for every digit combination of the given
// positions; the first position is the most significant.
std::vector<std::size_t> offsets(const std::vector<std::size_t>& pos, const Register& reg) {
  std::vector<std::size_t> out{0};
  for (std::size_t p : pos) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * reg.factor(p).dim);
    for (std::size_t base : out)
      for (std::size_t d = 0; d < reg.factor(p).dim; ++d) next.push_back(base + d * reg.stride(p));
    out = std::move(next);
  }
  return out;
}

void require_dim(const CMatrix& rho, const Register& reg, const char* who) {
  if (rho.rows() != rho.cols() || static_cast<std::size_t>(rho.rows()) != reg.dim())
    throw ConfigError(std::string(who) + ": matrix dimension does not match register");
}

} // namespace

CMatrix embed(const CMatrix& op, const std::vector<std::string>& sites, const Register& reg) {
  const auto pos = positions_of(sites, reg);
  std::size_t local = 1;
  for (auto p : pos) local *= reg.factor(p).dim;
  if (op.rows() != op.cols() || static_cast<std::size_t>(op.rows()) != local)
    throw ConfigError("embed: operator dimension does not match the listed sites");
  const auto loc = offsets(pos, reg);
  const auto rest = offsets(complement(pos, reg), reg);
  const auto D = static_cast<Eigen::Index>(reg.dim());
  CMatrix out = CMatrix::Zero(D, D);
  for (std::size_t r : rest)
    for (std::size_t a = 0; a < loc.size(); ++a)
      for (std::size_t b = 0; b < loc.size(); ++b) {
        const cplx v = op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v != cplx(0)) out(static_cast<Eigen::Index>(r + loc[a]), static_cast<Eigen::Index>(r + loc[b])) = v;
      }
  return out;
}

CMatrix embed(const CMatrix& op, const std::string& site, const Register& reg) {
  return embed(op, std::vector<std::string>{site}, reg);
}

FermionMap FermionMap::canonical(const Register& reg) {
  FermionMap m{reg, {}};
  for (std::size_t k = 0; k < reg.size(); ++k) {
    if (reg.factor(k).label.rfind("aux", 0) == 0) continue;
    if (reg.factor(k).dim != 2) throw ConfigError("FermionMap: non-qubit factor '" + reg.factor(k).label + "'");
    m.ordering.push_back(k);
  }
  return m;
}

CMatrix jw_annihilation(std::size_t i, const FermionMap& map) {
  if (i < 1 || i > map.ordering.size())
    throw ConfigError("jw_annihilation: site index " + std::to_string(i) + " out of range");
  const Register& reg = map.reg;
  const auto D = static_cast<Eigen::Index>(reg.dim());
  const std::size_t target = map.ordering[i - 1];
  CMatrix c = CMatrix::Zero(D, D);
  for (std::size_t col = 0; col < reg.dim(); ++col) {
    if (reg.digit(col, target) != 1) continue;
    int sign = 1;
    for (std::size_t j = 0; j + 1 < i; ++j)
      if (reg.digit(col, map.ordering[j]) == 1) sign = -sign;
    c(static_cast<Eigen::Index>(col - reg.stride(target)), static_cast<Eigen::Index>(col)) = sign;
  }
  return c;
}

std::vector<int> parity_diagonal(const Register& reg, const std::vector<std::string>& sites) {
  std::vector<std::size_t> pos;
  if (sites.empty()) {
    for (std::size_t k = 0; k < reg.size(); ++k) pos.push_back(k);
  } else {
    pos = positions_of(sites, reg);
  }
  for (auto p : pos)
    if (reg.factor(p).dim != 2) throw ConfigError("total_parity: non-qubit factor '" + reg.factor(p).label + "'");
  std::vector<int> diag(reg.dim(), 1);
  for (std::size_t idx = 0; idx < reg.dim(); ++idx)
    for (auto p : pos)
      if (reg.digit(idx, p) == 1) diag[idx] = -diag[idx];
  return diag;
}

CMatrix total_parity(const Register& reg, const std::vector<std::string>& sites) {
  const auto d = parity_diagonal(reg, sites);
  CMatrix p = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t k = 0; k < d.size(); ++k) p(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = d[k];
  return p;
}

CMatrix partial_trace(const CMatrix& rho, const std::vector<std::string>& keep, const Register& reg) {
  require_dim(rho, reg, "partial_trace");
  auto pos = positions_of(keep, reg);
  std::sort(pos.begin(), pos.end());
  const auto kept = offsets(pos, reg);
  const auto traced = offsets(complement(pos, reg), reg);
  const auto dk = static_cast<Eigen::Index>(kept.size());
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      cplx s = 0;
      for (std::size_t t : traced)
        s += rho(static_cast<Eigen::Index>(kept[a] + t), static_cast<Eigen::Index>(kept[b] + t));
      out(a, b) = s;
    }
  return out;
}

CMatrix partial_transpose(const CMatrix& rho, const std::vector<std::string>& subsystem, const Register& reg) {
  require_dim(rho, reg, "partial_transpose");
  const auto pos = positions_of(subsystem, reg);
  const auto sub = offsets(pos, reg);
  const auto rest = offsets(complement(pos, reg), reg);
  const auto D = static_cast<Eigen::Index>(reg.dim());
  CMatrix out(D, D);
  for (std::size_t r1 : rest)
    for (std::size_t r2 : rest)
      for (std::size_t a : sub)
        for (std::size_t b : sub)
          out(static_cast<Eigen::Index>(r1 + a), static_cast<Eigen::Index>(r2 + b)) =
              rho(static_cast<Eigen::Index>(r1 + b), static_cast<Eigen::Index>(r2 + a));
  return out;
}

CMatrix bipartite_matrix(const CVector& psi, const std::vector<std::string>& part_a, const Register& reg) {
  if (static_cast<std::size_t>(psi.size()) != reg.dim())
    throw ConfigError("bipartite_matrix: state dimension does not match register");
  auto pos = positions_of(part_a, reg);
  std::sort(pos.begin(), pos.end());
  const auto oa = offsets(pos, reg);
  const auto ob = offsets(complement(pos, reg), reg);
  CMatrix m(static_cast<Eigen::Index>(oa.size()), static_cast<Eigen::Index>(ob.size()));
  for (std::size_t a = 0; a < oa.size(); ++a)
    for (std::size_t b = 0; b < ob.size(); ++b)
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = psi(static_cast<Eigen::Index>(oa[a] + ob[b]));
  return m;
}

CMatrix projector(const CVector& psi) { return psi * psi.adjoint(); }

} // namespace adq
