#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "adq/errors.hpp"

namespace adq {

template <typename Real> using CMatrixT =
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real> using CVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using CMatrix = CMatrixT<double>;
using CVector = CVectorT<double>;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr cplx I_unit{0.0, 1.0};

/// Tolerances shared by every module.
struct NumericPolicy {
  double null_rel_tol = 1e-10;      // singular values below tol*sigma_max count as zero
  double zero_eig_rel_tol = 1e-10;  // eigenvalues below tol*max|lambda| count as zero
  double hermitian_tol = 1e-10;
  std::size_t max_dim = std::size_t{1} << 15;  // largest dense side kron may build
  int expm_max_squarings = 60;
};

inline constexpr NumericPolicy default_policy{};

struct EigenDecomposition {
  CVector values;                       // descending real part
  std::optional<CMatrix> right_vectors; // column k pairs with values[k]
  bool is_hermitian_input = false;
};

/// Kronecker product; entry (i*rb+k, j*cb+l) is a(i,j)*b(k,l).
template <typename DA, typename DB>
CMatrixT<typename Eigen::NumTraits<typename DA::Scalar>::Real>
kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
     std::size_t max_dim = default_policy.max_dim) {
  using Real = typename Eigen::NumTraits<typename DA::Scalar>::Real;
  const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  if (static_cast<std::size_t>(ra * rb) > max_dim || static_cast<std::size_t>(ca * cb) > max_dim)
    throw ResourceLimit("kron: result side exceeds " + std::to_string(max_dim));
  CMatrixT<Real> out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ca; ++j)
      out.block(i * rb, j * cb, rb, cb) = std::complex<Real>(a(i, j)) * b.template cast<std::complex<Real>>();
  return out;
}

/// Kronecker product of sparse factors, sparse result.
SparseCMatrix kron_sparse(const SparseCMatrix& a, const SparseCMatrix& b);

SparseCMatrix to_sparse(const CMatrix& a, double drop_tol = 0.0);

/// Matrix exponential. With hermitian_generator set, a must equal -i*H for
/// Hermitian H and the result is built from the eigenbasis of H.
CMatrix expm(const CMatrix& a, bool hermitian_generator = false,
             const NumericPolicy& pol = default_policy);

EigenDecomposition eig(const CMatrix& a, bool hermitian, bool vectors = false);

/// Eigenvalues only, general path. Sorted by descending real part.
CVector eigenvalues(const CMatrix& a);

double trace_norm(const CMatrix& a);

/// Orthonormal basis of the right null space; empty when full rank.
std::vector<CVector> null_space(const CMatrix& a, double tol = default_policy.null_rel_tol);

bool is_hermitian(const CMatrix& a, double tol = default_policy.hermitian_tol);

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }
inline CMatrix anticommutator(const CMatrix& a, const CMatrix& b) { return a * b + b * a; }

/// Descending real part, ties broken by imaginary part.
void sort_descending_real(CVector& values, CMatrix* vectors = nullptr);

} // namespace adq
