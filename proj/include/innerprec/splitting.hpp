#pragma once

// Stationary splittings A = M - N and the inner-iteration preconditioner
//
//   C(l) = sum_{i<l} H^i M^{-1},   H = M^{-1} N,
//
// realized as l stationary sweeps from a zero inner iterate. None of M, N,
// H, A^T A or A A^T is ever formed; normal-equations variants sweep over
// the columns (A^T A side) or rows (A A^T side) of A directly.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "innerprec/dense.hpp"
#include "innerprec/errors.hpp"
#include "innerprec/sparse_matrix.hpp"
#include "innerprec/vector_ops.hpp"

namespace innerprec {

enum class SplittingKind { Richardson, JOR, SSOR, RichardsonNE, CimminoNE, NESSOR };

/// Which symmetric matrix the splitting acts on: A itself, A^T A or A A^T.
enum class Side { Direct, NormalLeft, NormalRight };

inline std::string_view to_string(SplittingKind k) {
  switch (k) {
    case SplittingKind::Richardson: return "richardson";
    case SplittingKind::JOR: return "jor";
    case SplittingKind::SSOR: return "ssor";
    case SplittingKind::RichardsonNE: return "richardson-ne";
    case SplittingKind::CimminoNE: return "cimmino-ne";
    case SplittingKind::NESSOR: return "ne-ssor";
  }
  return "?";
}

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::Direct: return "direct";
    case Side::NormalLeft: return "normal-left";
    case Side::NormalRight: return "normal-right";
  }
  return "?";
}

inline std::optional<SplittingKind> parse_splitting_kind(std::string_view name) {
  for (auto k : {SplittingKind::Richardson, SplittingKind::JOR, SplittingKind::SSOR,
                 SplittingKind::RichardsonNE, SplittingKind::CimminoNE, SplittingKind::NESSOR}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

inline bool is_normal_kind(SplittingKind k) {
  return k == SplittingKind::RichardsonNE || k == SplittingKind::CimminoNE ||
         k == SplittingKind::NESSOR;
}

inline bool is_ssor_family(SplittingKind k) {
  return k == SplittingKind::SSOR || k == SplittingKind::NESSOR;
}

inline bool is_jacobi_family(SplittingKind k) {
  return k == SplittingKind::JOR || k == SplittingKind::CimminoNE;
}

/// Maps a kind onto its counterpart for the given side (SSOR <-> NE-SSOR,
/// JOR <-> Cimmino-NE, Richardson <-> Richardson-NE).
inline SplittingKind kind_for_side(SplittingKind k, Side side) {
  const bool want_ne = side != Side::Direct;
  if (is_normal_kind(k) == want_ne) return k;
  switch (k) {
    case SplittingKind::Richardson: return SplittingKind::RichardsonNE;
    case SplittingKind::JOR: return SplittingKind::CimminoNE;
    case SplittingKind::SSOR: return SplittingKind::NESSOR;
    case SplittingKind::RichardsonNE: return SplittingKind::Richardson;
    case SplittingKind::CimminoNE: return SplittingKind::JOR;
    case SplittingKind::NESSOR: return SplittingKind::SSOR;
  }
  return k;
}

/// A named stationary splitting of the induced symmetric matrix
/// (A, A^T A or A A^T) with relaxation parameter omega.
///
///   Richardson:  M = omega^{-1} I
///   JOR:         M = omega^{-1} D
///   SSOR:        M = omega^{-1} (2 - omega)^{-1} (D + omega L) D^{-1} (D + omega L^T)
///
/// where the induced matrix is L + D + L^T. Copies share the operand.
class Splitting {
public:
  Splitting(SplittingKind kind, double omega, SparseMatrix operand, Side side = Side::Direct)
      : kind_(kind), omega_(omega), side_(side) {
    if (!std::isfinite(omega) || omega == 0.0) {
      throw SplittingError("relaxation parameter omega must be finite and nonzero");
    }
    if (is_ssor_family(kind) && omega == 2.0) {
      throw SplittingError("SSOR splitting matrix is singular at omega = 2");
    }
    if (is_normal_kind(kind) != (side != Side::Direct)) {
      throw SplittingError(std::string("splitting kind '") + std::string(to_string(kind)) +
                           "' is incompatible with side '" + std::string(to_string(side)) + "'");
    }
    auto data = std::make_shared<Data>();
    if (side == Side::Direct) {
      if (!operand.is_square()) {
        throw DimensionError("direct splitting requires a square operand, got " +
                             std::to_string(operand.rows()) + "x" + std::to_string(operand.cols()));
      }
      if (operand.asymmetry() > 1e-12 * std::max(1.0, operand.max_abs())) {
        throw NotSymmetricError("direct splitting requires a symmetric operand");
      }
      data->diag = operand.diagonal_values();
    } else {
      data->transposed = operand.transpose();
      // Squared column norms (A^T A side) or squared row norms (A A^T side).
      const SparseMatrix& lines = side == Side::NormalLeft ? data->transposed : operand;
      data->diag.assign(lines.rows(), 0.0);
      for (std::size_t i = 0; i < lines.rows(); ++i) {
        for (double v : lines.row_values(i)) data->diag[i] += v * v;
      }
    }
    data->operand = std::move(operand);
    if (kind != SplittingKind::Richardson && kind != SplittingKind::RichardsonNE) {
      for (std::size_t i = 0; i < data->diag.size(); ++i) {
        if (data->diag[i] == 0.0) {
          const char* what = side == Side::NormalLeft    ? "zero column"
                             : side == Side::NormalRight ? "zero row"
                                                         : "zero diagonal entry";
          throw SplittingError(std::string(what) + " at index " + std::to_string(i) +
                               "; D must be nonsingular for this splitting");
        }
      }
    }
    data_ = std::move(data);
  }

  SplittingKind kind() const noexcept { return kind_; }
  double omega() const noexcept { return omega_; }
  Side side() const noexcept { return side_; }
  const SparseMatrix& operand() const noexcept { return data_->operand; }
  /// Diagonal D of the induced symmetric matrix.
  std::span<const double> diag() const noexcept { return data_->diag; }

  /// Dimension of the induced symmetric matrix.
  std::size_t dimension() const noexcept {
    return side_ == Side::NormalRight ? data_->operand.rows() : data_->operand.cols();
  }

  /// y = A_induced x, matrix-free.
  void apply_induced(std::span<const double> x, std::span<double> y) const {
    require_same_length(x.size(), dimension(), "apply_induced");
    require_same_length(y.size(), dimension(), "apply_induced output");
    const SparseMatrix& a = data_->operand;
    switch (side_) {
      case Side::Direct: spmv(a, x, y); break;
      case Side::NormalLeft: {
        Vector t(a.rows());
        spmv(a, x, t);
        spmv_t(a, t, y);
        break;
      }
      case Side::NormalRight: {
        Vector t(a.cols());
        spmv_t(a, x, t);
        spmv(a, t, y);
        break;
      }
    }
  }

  /// One stationary step z <- H z + M^{-1} r, in place. `z_is_zero` lets the
  /// first inner step skip the operator application.
  void step(std::span<const double> r, std::span<double> z, bool z_is_zero = false) const {
    require_same_length(r.size(), dimension(), "splitting step");
    require_same_length(z.size(), dimension(), "splitting step iterate");
    if (is_ssor_family(kind_)) {
      ssor_step(r, z, z_is_zero);
      return;
    }
    Vector res(r.begin(), r.end());
    if (!z_is_zero) {
      Vector az(dimension());
      apply_induced(z, az);
      for (std::size_t i = 0; i < res.size(); ++i) res[i] -= az[i];
    }
    const auto d = diag();
    const bool jacobi = is_jacobi_family(kind_);
    for (std::size_t i = 0; i < res.size(); ++i) {
      const double upd = jacobi ? omega_ * res[i] / d[i] : omega_ * res[i];
      z[i] = z_is_zero ? upd : z[i] + upd;
    }
  }

private:
  struct Data {
    SparseMatrix operand;
    SparseMatrix transposed;  // rows are columns of the operand (NE sides only)
    Vector diag;
  };

  // Forward then backward relaxation sweep; equals z + M^{-1}(r - A z) for
  // the SSOR splitting matrix M.
  void ssor_step(std::span<const double> r, std::span<double> z, bool z_is_zero) const {
    const std::size_t n = dimension();
    if (z_is_zero) std::fill(z.begin(), z.end(), 0.0);
    const auto d = diag();
    if (side_ == Side::Direct) {
      const SparseMatrix& a = data_->operand;
      auto relax = [&](std::size_t i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        double s = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * z[cols[k]];
        z[i] += omega_ * (r[i] - s) / d[i];
      };
      for (std::size_t i = 0; i < n; ++i) relax(i);
      for (std::size_t i = n; i-- > 0;) relax(i);
      return;
    }
    // Sweeping unknown i touches line i of A (a column for A^T A, a row for
    // A A^T); `w` carries the product of the other factor with z so that
    // (A_induced z)_i = <line_i, w>.
    const SparseMatrix& lines = side_ == Side::NormalLeft ? data_->transposed : data_->operand;
    const SparseMatrix& other = side_ == Side::NormalLeft ? data_->operand : data_->transposed;
    Vector w(other.rows(), 0.0);
    if (!z_is_zero) spmv(other, z, w);
    auto relax = [&](std::size_t i) {
      const auto cols = lines.row_cols(i);
      const auto vals = lines.row_values(i);
      double s = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * w[cols[k]];
      const double delta = omega_ * (r[i] - s) / d[i];
      z[i] += delta;
      for (std::size_t k = 0; k < cols.size(); ++k) w[cols[k]] += delta * vals[k];
    };
    for (std::size_t i = 0; i < n; ++i) relax(i);
    for (std::size_t i = n; i-- > 0;) relax(i);
  }

  SplittingKind kind_;
  double omega_;
  Side side_;
  std::shared_ptr<const Data> data_;
};

/// M^{-1} r: a single stationary step from the zero iterate.
inline Vector apply_M_inv(const Splitting& s, std::span<const double> r) {
  Vector z(s.dimension(), 0.0);
  s.step(r, z, true);
  return z;
}

/// A splitting together with the number of inner steps l >= 1.
///
/// `apply` is what the Krylov solvers call. When the splitting matrix is
/// negative definite the preconditioner can be flipped with `negated()`,
/// after which `apply` returns -C(l) r.
class InnerPreconditioner {
public:
  InnerPreconditioner(Splitting splitting, std::size_t ell) : splitting_(std::move(splitting)), ell_(ell) {
    if (ell_ < 1) throw SplittingError("number of inner steps must be at least 1");
  }

  const Splitting& splitting() const noexcept { return splitting_; }
  std::size_t ell() const noexcept { return ell_; }
  std::size_t dimension() const noexcept { return splitting_.dimension(); }
  bool is_negated() const noexcept { return negated_; }

  InnerPreconditioner negated() const {
    InnerPreconditioner p = *this;
    p.negated_ = !negated_;
    return p;
  }

  /// z = C(l) r from l steps with z(0) = 0 (sign-flipped if negated).
  void apply(std::span<const double> r, std::span<double> z) const {
    require_same_length(r.size(), dimension(), "inner preconditioner");
    require_same_length(z.size(), dimension(), "inner preconditioner output");
    splitting_.step(r, z, true);
    for (std::size_t i = 1; i < ell_; ++i) splitting_.step(r, z, false);
    if (negated_) scale(-1.0, z);
  }

private:
  Splitting splitting_;
  std::size_t ell_;
  bool negated_ = false;
};

/// C(l) r, ignoring any sign flip.
inline Vector apply_inner(const InnerPreconditioner& p, std::span<const double> r) {
  Vector z(p.dimension(), 0.0);
  const InnerPreconditioner raw = p.is_negated() ? p.negated() : p;
  raw.apply(r, z);
  return z;
}

/// Dense induced matrix: A, A^T A or A A^T.
inline DenseMatrix induced_dense(const Splitting& s) {
  const DenseMatrix a = to_dense(s.operand());
  switch (s.side()) {
    case Side::Direct: return a;
    case Side::NormalLeft: return a.transpose() * a;
    case Side::NormalRight: return a * a.transpose();
  }
  return a;
}

/// Splitting matrix M assembled from its closed form (not from sweeps).
inline DenseMatrix splitting_matrix_dense(const Splitting& s) {
  const std::size_t n = s.dimension();
  require_dense_cap(n, "splitting_matrix_dense");
  const auto ni = static_cast<Eigen::Index>(n);
  const double w = s.omega();
  if (s.kind() == SplittingKind::Richardson || s.kind() == SplittingKind::RichardsonNE) {
    return DenseMatrix::Identity(ni, ni) / w;
  }
  const DenseVector d = to_eigen(s.diag());
  if (is_jacobi_family(s.kind())) return DenseMatrix(d.asDiagonal()) / w;
  const DenseMatrix a = induced_dense(s);
  const DenseMatrix lower = a.triangularView<Eigen::StrictlyLower>();
  const DenseMatrix dm = d.asDiagonal();
  const DenseMatrix first = dm + w * lower;
  const DenseMatrix second = dm + w * lower.transpose();
  return first * d.cwiseInverse().asDiagonal() * second / (w * (2.0 - w));
}

struct DenseInner {
  DenseMatrix C;  // sum_{i<l} H^i M^{-1}
  DenseMatrix H;  // M^{-1} N
};

/// Dense C(l) and H built column by column from the matrix-free kernels.
inline DenseInner materialize_dense(const InnerPreconditioner& p) {
  const std::size_t n = p.dimension();
  require_dense_cap(n, "materialize_dense");
  const auto ni = static_cast<Eigen::Index>(n);
  DenseInner out{DenseMatrix(ni, ni), DenseMatrix(ni, ni)};
  const Vector zero(n, 0.0);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector c = apply_inner(p, e);
    Vector h = e;
    p.splitting().step(zero, h, false);
    for (std::size_t i = 0; i < n; ++i) {
      out.C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c[i];
      out.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i];
    }
    e[j] = 0.0;
  }
  return out;
}

} // namespace innerprec
