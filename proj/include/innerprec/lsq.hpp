#pragma once

// Least-squares and minimum-norm solvers as adapters over the Krylov kernels.
//
//   CGLS / LSMR:  pcg / pminres on A^T A x = A^T b with A^T A-side inner steps.
//   CGNE / MRNE:  pcg / pminres on A A^T u = b with A A^T-side inner steps,
//                 then x = A^T u.
//
// LSQR is mathematically equivalent to CGLS and is not a separate recursion.

#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "innerprec/errors.hpp"
#include "innerprec/krylov.hpp"
#include "innerprec/sparse_matrix.hpp"
#include "innerprec/splitting.hpp"
#include "innerprec/vector_ops.hpp"

namespace innerprec {

enum class LsqKind { LeastSquares, MinNorm };

struct LsqProblem {
  SparseMatrix A;  // m x n
  Vector b;        // length m
  LsqKind kind = LsqKind::LeastSquares;
};

struct LsqResult {
  Vector x;                           // length n
  double ls_residual_norm = 0.0;      // ||b - A x||
  double normal_residual_norm = 0.0;  // ||A^T (b - A x)||
  SolveResult inner;                  // on the induced system (x or u space)
};

namespace detail {

inline void check_lsq(const LsqProblem& prob, const InnerPreconditioner& prec, Side want) {
  require_same_length(prob.b.size(), prob.A.rows(), "least-squares right-hand side");
  const Splitting& s = prec.splitting();
  if (s.side() != want) {
    throw SplittingError(std::string("preconditioner side is '") + std::string(to_string(s.side())) +
                         "', solver requires '" + std::string(to_string(want)) + "'");
  }
  if (s.operand().rows() != prob.A.rows() || s.operand().cols() != prob.A.cols() ||
      s.operand().nnz() != prob.A.nnz()) {
    throw DimensionError("preconditioner was built on a different matrix than the problem's A");
  }
}

inline LsqResult finalize(const LsqProblem& prob, Vector x, SolveResult inner) {
  LsqResult out;
  out.x = std::move(x);
  Vector r = spmv(prob.A, out.x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = prob.b[i] - r[i];
  out.ls_residual_norm = norm2(r);
  out.normal_residual_norm = norm2(spmv_t(prob.A, r));
  out.inner = std::move(inner);
  return out;
}

template <class Solver>
LsqResult normal_left(const LsqProblem& prob, const InnerPreconditioner& prec, std::span<const double> x0,
                      const SolverConfig& cfg, Solver&& solve) {
  check_lsq(prob, prec, Side::NormalLeft);
  require_same_length(x0.size(), prob.A.cols(), "initial iterate");
  const NormalLeftOperator op(prob.A);
  const Vector rhs = spmv_t(prob.A, prob.b);
  SolveResult inner = solve(op, prec, rhs, x0, cfg);
  Vector x = inner.x;
  return finalize(prob, std::move(x), std::move(inner));
}

template <class Solver>
LsqResult normal_right(const LsqProblem& prob, const InnerPreconditioner& prec, std::span<const double> u0,
                       const SolverConfig& cfg, Solver&& solve) {
  check_lsq(prob, prec, Side::NormalRight);
  require_same_length(u0.size(), prob.A.rows(), "initial iterate u0");
  const NormalRightOperator op(prob.A);
  SolveResult inner = solve(op, prec, prob.b, u0, cfg);
  Vector x = spmv_t(prob.A, inner.x);
  return finalize(prob, std::move(x), std::move(inner));
}

struct PcgCall {
  template <class Op>
  SolveResult operator()(const Op& op, const InnerPreconditioner& p, std::span<const double> b,
                         std::span<const double> x0, const SolverConfig& cfg) const {
    return pcg(op, p, b, x0, cfg);
  }
};

struct PminresCall {
  template <class Op>
  SolveResult operator()(const Op& op, const InnerPreconditioner& p, std::span<const double> b,
                         std::span<const double> x0, const SolverConfig& cfg) const {
    return pminres(op, p, b, x0, cfg);
  }
};

} // namespace detail

/// CG on the normal equations. Stops on ||A^T r_k|| / ||A^T r_0|| <= tol.
/// The iterates stay in R(A^T) from x0 = 0 only when C maps R(A^T) into
/// itself (Richardson-NE); column sweeps give some other least-squares
/// solution.
inline LsqResult cgls(const LsqProblem& prob, const InnerPreconditioner& prec, std::span<const double> x0,
                      const SolverConfig& cfg = {}) {
  return detail::normal_left(prob, prec, x0, cfg, detail::PcgCall{});
}

inline LsqResult cgls(const LsqProblem& prob, const InnerPreconditioner& prec, const SolverConfig& cfg = {}) {
  const Vector x0(prob.A.cols(), 0.0);
  return cgls(prob, prec, x0, cfg);
}

/// MINRES on the normal equations; ||C^{1/2} A^T r_k|| is nonincreasing.
inline LsqResult lsmr(const LsqProblem& prob, const InnerPreconditioner& prec, std::span<const double> x0,
                      const SolverConfig& cfg = {}) {
  return detail::normal_left(prob, prec, x0, cfg, detail::PminresCall{});
}

inline LsqResult lsmr(const LsqProblem& prob, const InnerPreconditioner& prec, const SolverConfig& cfg = {}) {
  const Vector x0(prob.A.cols(), 0.0);
  return lsmr(prob, prec, x0, cfg);
}

/// CG on A A^T u = b, x = A^T u. Stops on ||b - A x_k|| / ||b - A x_0|| <= tol.
/// b outside R(A) shows up as a residual plateau and max_iterations.
inline LsqResult cgne(const LsqProblem& prob, const InnerPreconditioner& prec, std::span<const double> u0,
                      const SolverConfig& cfg = {}) {
  return detail::normal_right(prob, prec, u0, cfg, detail::PcgCall{});
}

inline LsqResult cgne(const LsqProblem& prob, const InnerPreconditioner& prec, const SolverConfig& cfg = {}) {
  const Vector u0(prob.A.rows(), 0.0);
  return cgne(prob, prec, u0, cfg);
}

inline LsqResult mrne(const LsqProblem& prob, const InnerPreconditioner& prec, std::span<const double> u0,
                      const SolverConfig& cfg = {}) {
  return detail::normal_right(prob, prec, u0, cfg, detail::PminresCall{});
}

inline LsqResult mrne(const LsqProblem& prob, const InnerPreconditioner& prec, const SolverConfig& cfg = {}) {
  const Vector u0(prob.A.rows(), 0.0);
  return mrne(prob, prec, u0, cfg);
}

} // namespace innerprec
