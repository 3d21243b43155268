#include "adq/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <lapacke.h>

namespace adq {

namespace {

using ColMatrix = Eigen::MatrixXcd;

void require_square(const CMatrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << who << ": expected square matrix, got " << a.rows() << "x" << a.cols();
    throw ConfigError(os.str());
  }
}

void require_finite(const CMatrix& a, const char* who) {
  if (!a.allFinite()) throw NumericError(std::string(who) + ": non-finite input");
}

// Degree-13 Pade approximant with scaling and squaring.
CMatrix expm_pade13(const CMatrix& a, const NumericPolicy& pol) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  if (s > pol.expm_max_squarings)
    throw NumericError("expm: norm too large for scaling and squaring (" + std::to_string(norm1) + ")");
  const CMatrix A = a / std::ldexp(1.0, s);
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
  const CMatrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                         b[3] * A2 + b[1] * id);
  const CMatrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
                    b[2] * A2 + b[0] * id;
  CMatrix R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  if (!R.allFinite()) throw NumericError("expm: scaling and squaring diverged");
  return R;
}

} // namespace

SparseCMatrix to_sparse(const CMatrix& a, double drop_tol) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > drop_tol) trip.emplace_back(i, j, a(i, j));
  SparseCMatrix s(a.rows(), a.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

SparseCMatrix kron_sparse(const SparseCMatrix& a, const SparseCMatrix& b) {
  const Eigen::Index rb = b.rows(), cb = b.cols();
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
  for (Eigen::Index i = 0; i < a.outerSize(); ++i)
    for (SparseCMatrix::InnerIterator ia(a, i); ia; ++ia)
      for (Eigen::Index k = 0; k < b.outerSize(); ++k)
        for (SparseCMatrix::InnerIterator ib(b, k); ib; ++ib)
          trip.emplace_back(ia.row() * rb + ib.row(), ia.col() * cb + ib.col(), ia.value() * ib.value());
  SparseCMatrix out(a.rows() * rb, a.cols() * cb);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

CMatrix expm(const CMatrix& a, bool hermitian_generator, const NumericPolicy& pol) {
  require_square(a, "expm");
  require_finite(a, "expm");
  if (a.rows() == 0) return a;
  if (!hermitian_generator) return expm_pade13(a, pol);

  const CMatrix h = I_unit * a;  // a = -iH
  if (!is_hermitian(h, pol.hermitian_tol))
    throw ConfigError("expm: hermitian_generator set but i*a is not Hermitian");
  const CMatrix hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ColMatrix> es(hs);
  if (es.info() != Eigen::Success) throw NumericError("expm: Hermitian eigensolver failed");
  const CVector phase = (-I_unit * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

void sort_descending_real(CVector& values, CMatrix* vectors) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
    if (values[x].real() != values[y].real()) return values[x].real() > values[y].real();
    return values[x].imag() > values[y].imag();
  });
  CVector v(values.size());
  for (std::size_t k = 0; k < idx.size(); ++k) v[static_cast<Eigen::Index>(k)] = values[idx[k]];
  values = v;
  if (vectors) {
    CMatrix m(vectors->rows(), vectors->cols());
    for (std::size_t k = 0; k < idx.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vectors->col(idx[k]);
    *vectors = std::move(m);
  }
}

EigenDecomposition eig(const CMatrix& a, bool hermitian, bool vectors) {
  require_square(a, "eig");
  require_finite(a, "eig");
  EigenDecomposition out;
  out.is_hermitian_input = hermitian;
  const Eigen::Index n = a.rows();
  if (n == 0) {
    out.values = CVector(0);
    if (vectors) out.right_vectors = CMatrix(0, 0);
    return out;
  }

  if (hermitian) {
    if (!is_hermitian(a)) throw ConfigError("eig: hermitian flag set on non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<ColMatrix> es(0.5 * (a + a.adjoint()),
                                                vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eig: Hermitian eigensolver did not converge");
    // ascending from Eigen; reverse for descending order
    out.values = es.eigenvalues().reverse().cast<cplx>();
    if (vectors) out.right_vectors = CMatrix(es.eigenvectors().rowwise().reverse());
    return out;
  }

  // column-major buffers: the row-major LAPACKE wrapper insists on ldvl >= n even with jobvl = 'N'
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor> work = a, vr_cm;
  CVector w(n);
  if (vectors) vr_cm.resize(n, n);
  const lapack_int ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', ln, reinterpret_cast<lapack_complex_double*>(work.data()), ln,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1,
      vectors ? reinterpret_cast<lapack_complex_double*>(vr_cm.data()) : nullptr, ln);
  CMatrix vr = vr_cm;
  if (info != 0) {
    std::ostringstream os;
    os << "eig: zgeev failed (info=" << info << ", n=" << n << ", |a|_max=" << a.cwiseAbs().maxCoeff() << ")";
    throw NumericError(os.str());
  }
  if (vectors) {
    sort_descending_real(w, &vr);
    const double anorm = std::max(1.0, a.norm());
    const double res = (a * vr - vr * w.asDiagonal()).norm();
    if (res > 1e-8 * anorm * std::sqrt(static_cast<double>(n))) {
      std::ostringstream os;
      os << "eig: eigenpair residual " << res << " exceeds bound (|a|=" << anorm << ")";
      throw NumericError(os.str());
    }
    out.right_vectors = std::move(vr);
  } else {
    sort_descending_real(w);
  }
  out.values = std::move(w);
  return out;
}

CVector eigenvalues(const CMatrix& a) { return eig(a, false, false).values; }

double trace_norm(const CMatrix& a) {
  require_square(a, "trace_norm");
  if (is_hermitian(a, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<ColMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("trace_norm: eigensolver failed");
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<ColMatrix> svd(a);
  return svd.singularValues().sum();
}

std::vector<CVector> null_space(const CMatrix& a, double tol) {
  if (tol <= 0) throw ConfigError("null_space: tol must be positive");
  std::vector<CVector> basis;
  const Eigen::Index n = a.cols();
  if (n == 0) return basis;
  if (a.rows() == 0) {
    for (Eigen::Index k = 0; k < n; ++k) basis.push_back(CVector::Unit(n, k));
    return basis;
  }
  Eigen::BDCSVD<ColMatrix> svd(ColMatrix(a), Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s[k] > tol * smax && smax > 0) ++rank;
  for (Eigen::Index k = rank; k < n; ++k) basis.push_back(svd.matrixV().col(k));
  return basis;
}

} // namespace adq
