#include "adq/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace adq {

namespace {

using ColMatrix = Eigen::MatrixXcd;

SparseCMatrix sparse_identity(std::size_t D) {
  SparseCMatrix I(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
  I.setIdentity();
  return I;
}

// Connected components of the (symmetrized) nonzero pattern.
std::vector<std::vector<Eigen::Index>> components(const SparseCMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseCMatrix::InnerIterator it(m, r); it; ++it) {
      const Eigen::Index a = find(it.row()), b = find(it.col());
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<Eigen::Index> root_to_block(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Eigen::Index>> blocks;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = find(i);
    if (root_to_block[r] < 0) {
      root_to_block[r] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(root_to_block[r])].push_back(i);
  }
  return blocks;
}

CMatrix dense_block(const SparseCMatrix& m, const std::vector<Eigen::Index>& idx) {
  std::vector<Eigen::Index> local(static_cast<std::size_t>(m.rows()), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) local[idx[k]] = static_cast<Eigen::Index>(k);
  const auto n = static_cast<Eigen::Index>(idx.size());
  CMatrix b = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (SparseCMatrix::InnerIterator it(m, idx[k]); it; ++it) b(static_cast<Eigen::Index>(k), local[it.col()]) = it.value();
  return b;
}

CMatrix hermitize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

double min_eigenvalue(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ColMatrix> es(hermitize(rho), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_density(const CMatrix& rho, double tol, const char* who) {
  if (!is_hermitian(rho, tol)) throw ConfigError(std::string(who) + ": density matrix not Hermitian");
  if (std::abs(rho.trace() - cplx(1)) > 1e-8) throw ConfigError(std::string(who) + ": density matrix trace is not 1");
  if (min_eigenvalue(rho) < -tol) throw ConfigError(std::string(who) + ": density matrix not positive semidefinite");
}

} // namespace

void LindbladModel::validate() const {
  const auto D = static_cast<Eigen::Index>(reg.dim());
  if (H.rows() != D || H.cols() != D) throw ConfigError(name + ": Hamiltonian dimension does not match register");
  if (!is_hermitian(H)) throw ConfigError(name + ": Hamiltonian is not Hermitian");
  for (const auto& j : jumps) {
    if (j.op.rows() != D || j.op.cols() != D) throw ConfigError(name + ": jump operator dimension does not match register");
    if (!(j.rate >= 0) || !std::isfinite(j.rate)) throw ConfigError(name + ": jump rate must be finite and non-negative");
  }
}

CVector vectorize(const CMatrix& rho) {
  const Eigen::Index D = rho.rows();
  CVector v(D * rho.cols());
  for (Eigen::Index j = 0; j < rho.cols(); ++j)
    for (Eigen::Index i = 0; i < D; ++i) v[i + j * D] = rho(i, j);
  return v;
}

CMatrix unvectorize(const CVector& v, std::size_t D) {
  const auto d = static_cast<Eigen::Index>(D);
  if (v.size() != d * d) throw ConfigError("unvectorize: length is not D^2");
  CMatrix rho(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) rho(i, j) = v[i + j * d];
  return rho;
}

Superoperator build_superoperator(const LindbladModel& m) {
  m.validate();
  const std::size_t D = m.dim();
  const SparseCMatrix I = sparse_identity(D);
  const SparseCMatrix H = to_sparse(hermitize(m.H));
  SparseCMatrix L = kron_sparse(I, H) - kron_sparse(SparseCMatrix(H.transpose()), I);
  L *= -I_unit;
  for (const auto& j : m.jumps) {
    if (j.rate == 0.0) continue;
    const SparseCMatrix op = to_sparse(j.op);
    const SparseCMatrix ldl = to_sparse(j.op.adjoint() * j.op);
    const SparseCMatrix conj_op = op.conjugate();
    SparseCMatrix term = kron_sparse(conj_op, op) - 0.5 * kron_sparse(I, ldl) -
                         0.5 * kron_sparse(SparseCMatrix(ldl.transpose()), I);
    L += j.rate * term;
  }
  double scale = 0;
  for (Eigen::Index r = 0; r < L.outerSize(); ++r)
    for (SparseCMatrix::InnerIterator it(L, r); it; ++it) scale = std::max(scale, std::abs(it.value()));
  const double thr = 1e-14 * std::max(scale, 1.0);
  L.prune([thr](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > thr; });
  L.makeCompressed();
  return Superoperator{std::move(L), D};
}

CMatrix dense(const Superoperator& s) { return CMatrix(s.matrix); }

CMatrix apply_lindbladian(const LindbladModel& m, const CMatrix& rho) {
  CMatrix out = -I_unit * (m.H * rho - rho * m.H);
  for (const auto& j : m.jumps) {
    if (j.rate == 0.0) continue;
    const CMatrix ldl = j.op.adjoint() * j.op;
    out += j.rate * (j.op * rho * j.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

SpectralData spectral_data(const Superoperator& s, std::optional<double> ztol, bool want_zero_modes) {
  const auto blocks = components(s.matrix);
  const Eigen::Index n = s.matrix.rows();
  SpectralData out;
  std::vector<CVector> block_vals;
  block_vals.reserve(blocks.size());
  double maxabs = 0;
  for (const auto& b : blocks) {
    const CMatrix B = dense_block(s.matrix, b);
    if (!B.allFinite()) throw NumericError("spectral_data: non-finite superoperator entries");
    block_vals.push_back(eigenvalues(B));
    if (block_vals.back().size()) maxabs = std::max(maxabs, block_vals.back().cwiseAbs().maxCoeff());
    out.block_sizes.push_back(b.size());
  }
  out.ztol = ztol.value_or(1e-9 * std::max(maxabs, 1e-300));

  out.eigenvalues.resize(n);
  Eigen::Index pos = 0;
  for (const auto& v : block_vals) {
    out.eigenvalues.segment(pos, v.size()) = v;
    pos += v.size();
  }
  sort_descending_real(out.eigenvalues);

  std::size_t n_zero = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx l = out.eigenvalues[k];
    if (l.real() > 1e-10 * std::max(1.0, maxabs))
      throw NumericError("spectral_data: eigenvalue with positive real part " + std::to_string(l.real()));
    if (std::abs(l) <= out.ztol) {
      ++n_zero;
    } else if (std::abs(l.real()) > out.ztol) {
      out.gap = out.gap ? std::min(*out.gap, std::abs(l.real())) : std::abs(l.real());
    }
  }
  if (n_zero == 0) throw NumericError("spectral_data: no zero mode within ztol; generator is not trace preserving");
  if (!want_zero_modes) return out;

  const std::size_t D = s.dim;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& v = block_vals[bi];
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) <= out.ztol) ++k;
    if (k == 0) continue;
    const CMatrix B = dense_block(s.matrix, blocks[bi]);
    Eigen::BDCSVD<ColMatrix> svd(ColMatrix(B), Eigen::ComputeFullV);
    const Eigen::Index nb = B.cols();
    for (std::size_t q = 0; q < k; ++q) {
      const CVector local = svd.matrixV().col(nb - 1 - static_cast<Eigen::Index>(q));
      if ((B * local).norm() > std::max(out.ztol, 1e-12))
        throw NumericError("spectral_data: zero-mode residual exceeds ztol");
      CVector full = CVector::Zero(n);
      for (std::size_t t = 0; t < blocks[bi].size(); ++t) full[blocks[bi][t]] = local[static_cast<Eigen::Index>(t)];
      out.zero_modes.push_back(full);
      CMatrix X = unvectorize(full, D);
      const cplx tr = X.trace();
      if (std::abs(tr) > 1e-8 * X.norm()) out.steady_states.push_back(hermitize(X / tr));
    }
  }
  return out;
}

DarkSubspace dark_subspace(const LindbladModel& m, double tol) {
  m.validate();
  const auto D = static_cast<Eigen::Index>(m.dim());
  std::vector<const Jump*> active;
  for (const auto& j : m.jumps)
    if (j.rate > 0) active.push_back(&j);
  CMatrix stacked(static_cast<Eigen::Index>(active.size()) * D, D);
  for (std::size_t k = 0; k < active.size(); ++k)
    stacked.middleRows(static_cast<Eigen::Index>(k) * D, D) = std::sqrt(active[k]->rate) * active[k]->op;

  auto kernel = null_space(stacked, tol);
  CMatrix Q(D, static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t k = 0; k < kernel.size(); ++k) Q.col(static_cast<Eigen::Index>(k)) = kernel[k];

  const CMatrix H = hermitize(m.H);
  const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
  // Shrink to the largest H-invariant subspace inside the common kernel.
  while (Q.cols() > 0) {
    const CMatrix HQ = H * Q;
    const CMatrix leak = HQ - Q * (Q.adjoint() * HQ);
    if (leak.cwiseAbs().maxCoeff() <= 1e-9 * hscale) break;
    auto c = null_space(leak / hscale, 1e-8);
    if (c.size() == static_cast<std::size_t>(Q.cols())) break;
    CMatrix C(Q.cols(), static_cast<Eigen::Index>(c.size()));
    for (std::size_t k = 0; k < c.size(); ++k) C.col(static_cast<Eigen::Index>(k)) = c[k];
    Q = Q * C;  // orthonormal columns times orthonormal columns
  }

  DarkSubspace out;
  if (Q.cols() == 0) return out;
  const CMatrix h = hermitize(Q.adjoint() * H * Q);
  Eigen::SelfAdjointEigenSolver<ColMatrix> es(h);
  for (Eigen::Index k = 0; k < Q.cols(); ++k) {
    CVector v = Q * es.eigenvectors().col(k);
    v.normalize();
    // fix the global phase: largest component real positive
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v[imax]) / std::abs(v[imax]);
    out.basis.push_back(v);
    out.energies.push_back(es.eigenvalues()[k]);
  }
  return out;
}

std::optional<CVector> steady_state_dark(const LindbladModel& m) {
  auto ds = dark_subspace(m);
  if (ds.basis.empty()) return std::nullopt;
  if (ds.basis.size() > 1) throw DegenerateKernel(ds.basis.size());
  return ds.basis.front();
}

namespace {

struct SpectralBlock {
  std::vector<Eigen::Index> idx;
  CMatrix V;
  CVector lambda, coeff;
};

bool spectral_propagators(const Superoperator& s, const CVector& x0, std::vector<SpectralBlock>& out) {
  for (auto& b : components(s.matrix)) {
    CVector xb(static_cast<Eigen::Index>(b.size()));
    for (std::size_t k = 0; k < b.size(); ++k) xb[static_cast<Eigen::Index>(k)] = x0[b[k]];
    if (xb.norm() == 0.0) continue;
    const auto ed = eig(dense_block(s.matrix, b), false, true);
    SpectralBlock sb{std::move(b), *ed.right_vectors, ed.values, {}};
    sb.coeff = sb.V.partialPivLu().solve(xb);
    if (!sb.coeff.allFinite() || (sb.V * sb.coeff - xb).norm() > 1e-8 * std::max(1.0, xb.norm())) return false;
    out.push_back(std::move(sb));
  }
  return true;
}

CMatrix rk4_step(const LindbladModel& m, const CMatrix& rho, double h) {
  const CMatrix k1 = apply_lindbladian(m, rho);
  const CMatrix k2 = apply_lindbladian(m, rho + 0.5 * h * k1);
  const CMatrix k3 = apply_lindbladian(m, rho + 0.5 * h * k2);
  const CMatrix k4 = apply_lindbladian(m, rho + h * k3);
  return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

std::vector<CMatrix> evolve(const LindbladModel& m, const CMatrix& rho0, const std::vector<double>& times,
                            const EvolveOptions& opt) {
  m.validate();
  if (static_cast<std::size_t>(rho0.rows()) != m.dim() || rho0.rows() != rho0.cols())
    throw ConfigError("evolve: initial state dimension does not match model");
  check_density(rho0, 1e-10, "evolve");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0)) throw ConfigError("evolve: times must be non-negative");
    if (k && times[k] < times[k - 1]) throw ConfigError("evolve: times must be non-decreasing");
  }

  const std::size_t D = m.dim();
  std::vector<CMatrix> out;
  out.reserve(times.size());
  bool done = false;

  if (D * D <= opt.spectral_max_side) {
    const Superoperator s = build_superoperator(m);
    const CVector x0 = vectorize(rho0);
    std::vector<SpectralBlock> blocks;
    if (spectral_propagators(s, x0, blocks)) {
      for (double t : times) {
        if (t == 0.0) {
          out.push_back(rho0);
          continue;
        }
        CVector x = CVector::Zero(static_cast<Eigen::Index>(D * D));
        for (const auto& b : blocks) {
          const CVector xb = b.V * (b.lambda * t).array().exp().matrix().cwiseProduct(b.coeff);
          for (std::size_t k = 0; k < b.idx.size(); ++k) x[b.idx[k]] = xb[static_cast<Eigen::Index>(k)];
        }
        out.push_back(unvectorize(x, D));
      }
      done = true;
    }
  }

  if (!done) {
    CMatrix rho = rho0;
    double t = 0.0;
    double scale = 2.0 * m.H.norm();
    for (const auto& j : m.jumps) scale += 2.0 * j.rate * j.op.squaredNorm();
    double h = 0.1 / std::max(scale, 1e-12);
    for (double target : times) {
      while (t < target) {
        const double step = std::min(h, target - t);
        const CMatrix full = rk4_step(m, rho, step);
        const CMatrix half = rk4_step(m, rk4_step(m, rho, 0.5 * step), 0.5 * step);
        const double err = (full - half).cwiseAbs().maxCoeff();
        const double fac = err > 0 ? 0.9 * std::pow(opt.rk_tol / err, 0.2) : 2.0;
        if (err <= opt.rk_tol) {
          rho = half + (half - full) / 15.0;
          t += step;
          if (step == h) h *= std::min(2.0, fac);
        } else {
          h = step * std::max(0.2, fac);
          if (h < opt.min_step) throw NumericError("evolve: step size underflow");
        }
      }
      out.push_back(t == 0.0 ? rho0 : rho);
    }
  }

  for (auto& r : out) {
    r = hermitize(r);
    if (std::abs(r.trace() - cplx(1)) > 1e-8) throw NumericError("evolve: trace drift beyond 1e-8");
    if (min_eigenvalue(r) < -1e-6) throw NumericError("evolve: negative eigenvalue beyond -1e-6");
  }
  return out;
}

double fidelity(const CMatrix& rho, const CVector& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ConfigError("fidelity: reference state not normalized");
  if (rho.rows() != psi.size() || rho.cols() != psi.size()) throw ConfigError("fidelity: dimension mismatch");
  const double f = std::real(psi.dot(rho * psi));
  return std::clamp(f, 0.0, 1.0);
}

double variance_rate_bound(const CMatrix& L, const CVector& psi) {
  if (L.rows() != L.cols() || L.cols() != psi.size()) throw ConfigError("variance_rate_bound: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ConfigError("variance_rate_bound: state not normalized");
  const double leak = (L * psi).norm();
  if (leak > 1e-8) {
    std::ostringstream os;
    os << "variance_rate_bound: state is not annihilated by L (|L psi| = " << leak << ")";
    throw ConfigError(os.str());
  }
  auto var = [&](const CMatrix& op) {
    const CMatrix X = op + op.adjoint();
    const CVector Xp = X * psi;
    const double mean = std::real(psi.dot(Xp));
    return Xp.squaredNorm() - mean * mean;
  };
  const double v = var(L);
  const double vg = var(std::polar(1.0, M_PI / 3.0) * L);
  if (std::abs(v - vg) > 1e-10 * std::max(1.0, v))
    throw NumericError("variance_rate_bound: gauge invariance check failed");
  return v;
}

} // namespace adq
