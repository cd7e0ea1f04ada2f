#pragma once

// Matrix-free preconditioned CG and MINRES for symmetric (possibly singular,
// possibly indefinite) systems. The preconditioner is any symmetric definite
// application r -> z, typically an InnerPreconditioner.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "innerprec/errors.hpp"
#include "innerprec/sparse_matrix.hpp"
#include "innerprec/splitting.hpp"
#include "innerprec/vector_ops.hpp"

namespace innerprec {

/// A symmetric linear map y = Op(x) on R^n.
template <class T>
concept LinearOperator = requires(const T& op, std::span<const double> x, std::span<double> y) {
  { op.dimension() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

/// z = P(r) for a symmetric definite P.
template <class T>
concept Preconditioner = requires(const T& p, std::span<const double> r, std::span<double> z) {
  { p.dimension() } -> std::convertible_to<std::size_t>;
  p.apply(r, z);
};

/// A sparse symmetric matrix as an operator.
class SparseOperator {
public:
  explicit SparseOperator(const SparseMatrix& a) : a_(&a) {
    if (!a.is_square()) throw DimensionError("SparseOperator requires a square matrix");
  }
  std::size_t dimension() const noexcept { return a_->rows(); }
  void apply(std::span<const double> x, std::span<double> y) const { spmv(*a_, x, y); }

private:
  const SparseMatrix* a_;
};

/// x -> A^T A x without forming A^T A.
class NormalLeftOperator {
public:
  explicit NormalLeftOperator(const SparseMatrix& a) : a_(&a), tmp_(a.rows()) {}
  std::size_t dimension() const noexcept { return a_->cols(); }
  void apply(std::span<const double> x, std::span<double> y) const {
    spmv(*a_, x, tmp_);
    spmv_t(*a_, tmp_, y);
  }

private:
  const SparseMatrix* a_;
  mutable Vector tmp_;
};

/// u -> A A^T u without forming A A^T.
class NormalRightOperator {
public:
  explicit NormalRightOperator(const SparseMatrix& a) : a_(&a), tmp_(a.cols()) {}
  std::size_t dimension() const noexcept { return a_->rows(); }
  void apply(std::span<const double> x, std::span<double> y) const {
    spmv_t(*a_, x, tmp_);
    spmv(*a_, tmp_, y);
  }

private:
  const SparseMatrix* a_;
  mutable Vector tmp_;
};

/// C = I.
class IdentityPreconditioner {
public:
  explicit IdentityPreconditioner(std::size_t n) : n_(n) {}
  std::size_t dimension() const noexcept { return n_; }
  void apply(std::span<const double> r, std::span<double> z) const {
    std::copy(r.begin(), r.end(), z.begin());
  }

private:
  std::size_t n_;
};

enum class Termination {
  converged,
  max_iterations,
  breakdown_indefinite_preconditioner,
  breakdown_zero_curvature,
  /// The Krylov space is exhausted without reaching the tolerance
  /// (typically b outside the range of a singular operator).
  stagnated,
};

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::breakdown_indefinite_preconditioner: return "breakdown_indefinite_preconditioner";
    case Termination::breakdown_zero_curvature: return "breakdown_zero_curvature";
    case Termination::stagnated: return "stagnated";
  }
  return "?";
}

struct SolverConfig {
  double tol = 1e-10;            // on ||b - Op x_k|| / ||b - Op x_0||
  std::size_t max_outer = 0;     // 0 selects 10 * dimension
  double breakdown_tol = 1e-14;  // relative, for the definiteness checks
  bool record_history = true;
  std::size_t residual_refresh = 50;  // recompute the true residual this often
  /// Called with (k, x_k) for k = 0, 1, ... when set.
  std::function<void(std::size_t, std::span<const double>)> observer;

  void validate() const {
    if (!(tol > 0.0)) throw Error("solver tolerance must be positive");
    if (!(breakdown_tol >= 0.0)) throw Error("breakdown tolerance must be nonnegative");
  }
  std::size_t outer_limit(std::size_t n) const { return max_outer ? max_outer : std::max<std::size_t>(1, 10 * n); }
};

struct HistoryRecord {
  std::size_t k;
  double res_norm;  // ||r_k||_2 (true residual of the induced system)
  double aux;       // (r_k, z_k) for CG; ||C^{1/2} r_k|| estimate for MINRES
};

struct ConvergenceHistory {
  std::vector<HistoryRecord> records;

  std::string to_csv() const {
    std::ostringstream out;
    out << "k,res_norm,aux\n";
    char buf[96];
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.k, r.res_norm, r.aux);
      out << buf;
    }
    return out.str();
  }
};

struct SolveResult {
  Vector x;
  std::size_t iterations = 0;
  Termination termination = Termination::max_iterations;
  ConvergenceHistory history;
  double initial_residual = 0.0;  // ||b - Op x_0||
  double final_residual = 0.0;    // ||b - Op x|| recomputed after the solve
};

namespace detail {

template <LinearOperator Op>
Vector residual(const Op& op, std::span<const double> b, std::span<const double> x) {
  Vector r(b.size());
  op.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

template <LinearOperator Op, Preconditioner P>
void check_shapes(const Op& op, const P& prec, std::span<const double> b, std::span<const double> x0) {
  require_same_length(prec.dimension(), op.dimension(), "preconditioner dimension");
  require_same_length(b.size(), op.dimension(), "right-hand side dimension");
  require_same_length(x0.size(), op.dimension(), "initial iterate dimension");
}

} // namespace detail

/// Conjugate gradients preconditioned by C:
///
///   alpha_k = (r_k, z_k) / (A p_k, p_k),  x += alpha p,  r -= alpha A p,
///   z_{k+1} = C r_{k+1},  beta_k = (r_{k+1}, z_{k+1}) / (r_k, z_k),
///   p_{k+1} = z_{k+1} + beta_k p_k.
///
/// For SPSD Op, SPD C and b in R(Op) the iterates converge to a solution.
template <LinearOperator Op, Preconditioner P>
SolveResult pcg(const Op& op, const P& prec, std::span<const double> b, std::span<const double> x0,
                const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_shapes(op, prec, b, x0);
  const std::size_t n = op.dimension();
  const std::size_t limit = cfg.outer_limit(n);

  SolveResult res;
  res.x.assign(x0.begin(), x0.end());
  Vector r = detail::residual(op, b, res.x);
  Vector z(n), p(n), q(n);
  prec.apply(r, z);
  p = z;
  double rz = dot(r, z);
  double rnorm = norm2(r);
  const double r0 = rnorm;
  res.initial_residual = r0;
  const double target = cfg.tol * r0;

  auto record = [&](std::size_t k) {
    if (cfg.record_history) res.history.records.push_back({k, rnorm, rz});
    if (cfg.observer) cfg.observer(k, res.x);
  };
  record(0);

  auto finish = [&](Termination t) {
    res.termination = t;
    res.final_residual = norm2(detail::residual(op, b, res.x));
    if (t == Termination::converged && res.final_residual > target) res.termination = Termination::max_iterations;
    return res;
  };

  if (r0 == 0.0) return finish(Termination::converged);

  for (std::size_t k = 0; k < limit; ++k) {
    if (rz <= cfg.breakdown_tol * rnorm * norm2(z)) {
      return finish(Termination::breakdown_indefinite_preconditioner);
    }
    op.apply(p, q);
    const double pq = dot(p, q);
    if (pq <= 0.0) return finish(Termination::breakdown_zero_curvature);
    const double alpha = rz / pq;
    axpy(alpha, p, res.x);
    axpy(-alpha, q, r);
    res.iterations = k + 1;
    if (cfg.residual_refresh && res.iterations % cfg.residual_refresh == 0) {
      r = detail::residual(op, b, res.x);
    }
    rnorm = norm2(r);
    bool done = false;
    if (rnorm <= target) {
      // Confirm against a freshly computed residual before stopping.
      r = detail::residual(op, b, res.x);
      rnorm = norm2(r);
      done = rnorm <= target;
    }
    prec.apply(r, z);
    const double rz_next = dot(r, z);
    if (done) {
      rz = rz_next;
      record(res.iterations);
      return finish(Termination::converged);
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    record(res.iterations);
  }
  return finish(Termination::max_iterations);
}

/// MINRES preconditioned by C: Lanczos in the C-inner product with the
/// tridiagonal reduced by Givens rotations. Each iterate minimizes
/// ||C^{1/2}(b - Op x_k)||_2 over x_0 + K_k(C Op, C r_0). Op may be
/// indefinite and singular; C must be SPD.
///
/// The residual r_k is carried by recurrence (via Op w_k) so that the
/// stopping test uses the unpreconditioned residual without an extra
/// operator application per step.
template <LinearOperator Op, Preconditioner P>
SolveResult pminres(const Op& op, const P& prec, std::span<const double> b, std::span<const double> x0,
                    const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::check_shapes(op, prec, b, x0);
  const std::size_t n = op.dimension();
  const std::size_t limit = cfg.outer_limit(n);

  SolveResult res;
  res.x.assign(x0.begin(), x0.end());
  Vector r = detail::residual(op, b, res.x);
  double rnorm = norm2(r);
  const double r0 = rnorm;
  res.initial_residual = r0;
  const double target = cfg.tol * r0;

  Vector y(n);
  prec.apply(r, y);
  const double beta1_sq = dot(r, y);
  double phibar = beta1_sq > 0.0 ? std::sqrt(beta1_sq) : 0.0;

  auto record = [&](std::size_t k) {
    if (cfg.record_history) res.history.records.push_back({k, rnorm, phibar});
    if (cfg.observer) cfg.observer(k, res.x);
  };
  auto finish = [&](Termination t) {
    res.termination = t;
    res.final_residual = norm2(detail::residual(op, b, res.x));
    if (t == Termination::converged && res.final_residual > target) res.termination = Termination::max_iterations;
    return res;
  };

  if (r0 == 0.0) {
    record(0);
    return finish(Termination::converged);
  }
  if (beta1_sq < 0.0 || beta1_sq <= cfg.breakdown_tol * r0 * norm2(y)) {
    record(0);
    return finish(Termination::breakdown_indefinite_preconditioner);
  }
  record(0);

  const double beta1 = std::sqrt(beta1_sq);
  // Lanczos vectors in the unpreconditioned space: r1 = v_{k-1}, r2 = v_k
  // scaled by beta; y holds C r2.
  Vector r1 = r, r2 = r;
  Vector v(n), av(n);
  Vector w(n, 0.0), w1(n, 0.0), w2(n, 0.0);
  Vector aw(n, 0.0), aw1(n, 0.0), aw2(n, 0.0);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
  double cs = -1.0, sn = 0.0;
  double tnorm_sq = 0.0;  // Frobenius norm of the Lanczos tridiagonal so far

  for (std::size_t itn = 1; itn <= limit; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    op.apply(v, av);
    y = av;
    if (itn >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1.swap(r2);
    r2 = y;
    prec.apply(r2, y);
    oldb = beta;
    const double beta_sq = dot(r2, y);
    const double scale_ref = norm2(r2) * norm2(y);
    if (beta_sq < -cfg.breakdown_tol * scale_ref) {
      return finish(Termination::breakdown_indefinite_preconditioner);
    }
    beta = beta_sq > 0.0 ? std::sqrt(beta_sq) : 0.0;
    tnorm_sq += alfa * alfa + oldb * oldb + beta * beta;

    // Apply the previous rotations and form the new one.
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::hypot(gbar, beta);
    if (gamma <= 1e-13 * std::sqrt(tnorm_sq)) {
      // Singular tridiagonal: b has a component outside the range of Op and
      // the step would be unbounded. Keep the current least-squares iterate.
      r = detail::residual(op, b, res.x);
      rnorm = norm2(r);
      return finish(Termination::stagnated);
    }
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    // Search direction w_k and its image Op w_k.
    w1.swap(w2);
    w2.swap(w);
    aw1.swap(aw2);
    aw2.swap(aw);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
      aw[i] = (av[i] - oldeps * aw1[i] - delta * aw2[i]) / gamma;
    }
    axpy(phi, w, res.x);
    axpy(-phi, aw, r);
    res.iterations = itn;
    if (cfg.residual_refresh && itn % cfg.residual_refresh == 0) r = detail::residual(op, b, res.x);
    rnorm = norm2(r);

    const bool exhausted = beta <= cfg.breakdown_tol * beta1 || !std::isfinite(beta);
    if (rnorm <= target || exhausted) {
      r = detail::residual(op, b, res.x);
      rnorm = norm2(r);
      record(itn);
      if (rnorm <= target) return finish(Termination::converged);
      if (exhausted) return finish(Termination::stagnated);
      continue;
    }
    record(itn);
  }
  return finish(Termination::max_iterations);
}

} // namespace innerprec
