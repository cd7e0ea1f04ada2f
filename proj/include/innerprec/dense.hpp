#pragma once

// Dense desk-scale linear algebra. Everything here is an oracle or analysis
// helper; the solvers never touch dense storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "innerprec/errors.hpp"
#include "innerprec/sparse_matrix.hpp"
#include "innerprec/vector_ops.hpp"

namespace innerprec {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DenseVector = Eigen::VectorXd;

/// Dense analysis refuses operands larger than this.
inline constexpr std::size_t kDenseCap = 2000;

inline void require_dense_cap(std::size_t n, const char* what) {
  if (n > kDenseCap) {
    throw SizeCapError(std::string(what) + ": dimension " + std::to_string(n) +
                       " exceeds dense cap " + std::to_string(kDenseCap));
  }
}

inline DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(a.rows()),
                                    static_cast<Eigen::Index>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
    }
  }
  return d;
}

inline SparseMatrix to_sparse(const DenseMatrix& d) {
  return SparseMatrix::from_row_major(static_cast<std::size_t>(d.rows()),
                                      static_cast<std::size_t>(d.cols()),
                                      std::span<const double>(d.data(), static_cast<std::size_t>(d.size())));
}

inline DenseVector to_eigen(std::span<const double> v) {
  DenseVector e(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<Eigen::Index>(i)) = v[i];
  return e;
}

inline Vector to_std(const DenseVector& v) { return Vector(v.data(), v.data() + v.size()); }

inline double max_abs(const DenseMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline double asymmetry(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("asymmetry: matrix is not square");
  return a.size() == 0 ? 0.0 : (a - a.transpose()).cwiseAbs().maxCoeff();
}

/// Throws NotSymmetricError unless max|A - A^T| <= tol * max(1, max|A|).
inline void require_symmetric(const DenseMatrix& a, double tol, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
  const double asym = asymmetry(a);
  if (asym > tol * std::max(1.0, max_abs(a))) {
    throw NotSymmetricError(std::string(what) + ": max|A - A^T| = " + std::to_string(asym));
  }
}

struct SymEig {
  DenseVector eigenvalues;   // ascending
  DenseMatrix eigenvectors;  // orthonormal columns

  double min() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
  double max() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
  double max_abs() const { return std::max(std::abs(min()), std::abs(max())); }
};

/// Symmetric eigendecomposition. The input is symmetrized before solving,
/// so tiny asymmetries under the tolerance do not leak into the result.
inline SymEig dense_sym_eig(const DenseMatrix& a) {
  require_symmetric(a, 1e-10, "dense_sym_eig");
  require_dense_cap(static_cast<std::size_t>(a.rows()), "dense_sym_eig");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("dense_sym_eig: eigensolver did not converge");
  return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

inline DenseMatrix recompose(const SymEig& e, const DenseVector& mapped) {
  return e.eigenvectors * mapped.asDiagonal() * e.eigenvectors.transpose();
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix. For symmetric input
/// this coincides with the group inverse. Eigenvalues with
/// |lambda| <= rank_tol * max|lambda| are treated as zero.
inline DenseMatrix pinv_sym(const DenseMatrix& a, double rank_tol = 1e-12) {
  if (!(rank_tol > 0.0)) throw Error("pinv_sym: rank_tol must be positive");
  const SymEig e = dense_sym_eig(a);
  const double cut = rank_tol * e.max_abs();
  DenseVector inv(e.eigenvalues.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    const double l = e.eigenvalues(i);
    inv(i) = std::abs(l) <= cut ? 0.0 : 1.0 / l;
  }
  return recompose(e, inv);
}

inline DenseMatrix sqrt_sym_pd(const DenseMatrix& a) {
  const SymEig e = dense_sym_eig(a);
  if (e.eigenvalues.size() > 0 && !(e.min() > 0.0)) {
    throw NotDefiniteError("sqrt_sym_pd: matrix is not positive definite (min eigenvalue " +
                           std::to_string(e.min()) + ")");
  }
  return recompose(e, e.eigenvalues.cwiseSqrt());
}

inline DenseMatrix inv_sqrt_sym_pd(const DenseMatrix& a) {
  const SymEig e = dense_sym_eig(a);
  if (e.eigenvalues.size() > 0 && !(e.min() > 0.0)) {
    throw NotDefiniteError("inv_sqrt_sym_pd: matrix is not positive definite (min eigenvalue " +
                           std::to_string(e.min()) + ")");
  }
  return recompose(e, e.eigenvalues.cwiseSqrt().cwiseInverse());
}

/// Rank of a symmetric matrix under the same relative cut as pinv_sym.
inline std::size_t rank_sym(const DenseMatrix& a, double rank_tol = 1e-12) {
  const SymEig e = dense_sym_eig(a);
  const double cut = rank_tol * e.max_abs();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
    if (std::abs(e.eigenvalues(i)) > cut) ++r;
  }
  return r;
}

} // namespace innerprec
