#pragma once

// Command-line front end: solve, analyze, bound and bench. All logic lives
// here so the tests can drive `run` in-process; main.cpp only forwards argv.
//
// Exit codes: 0 converged, 1 usage / IO / input error, 2 not converged
// (iteration limit or stagnation), 3 breakdown, 4 size cap or failed
// hypothesis, 5 measured residual above the theoretical bound.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/QR>

#include "innerprec/innerprec.hpp"
#include "innerprec/report.hpp"

namespace innerprec::cli {

using report::Json;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNotConverged = 2,
  kBreakdown = 3,
  kCapOrHypothesis = 4,
  kBoundViolation = 5,
};

inline int exit_code(Termination t) {
  switch (t) {
    case Termination::converged: return kOk;
    case Termination::max_iterations:
    case Termination::stagnated: return kNotConverged;
    case Termination::breakdown_indefinite_preconditioner:
    case Termination::breakdown_zero_curvature: return kBreakdown;
  }
  return kUsage;
}

/// Thrown for bad flag combinations detected after parsing.
struct UsageError : Error {
  using Error::Error;
};

enum class Method { cg, minres, cgls, lsmr, cgne, mrne };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cg: return "cg";
    case Method::minres: return "minres";
    case Method::cgls: return "cgls";
    case Method::lsmr: return "lsmr";
    case Method::cgne: return "cgne";
    case Method::mrne: return "mrne";
  }
  return "?";
}

inline Side side_of(Method m) {
  switch (m) {
    case Method::cg:
    case Method::minres: return Side::Direct;
    case Method::cgls:
    case Method::lsmr: return Side::NormalLeft;
    case Method::cgne:
    case Method::mrne: return Side::NormalRight;
  }
  return Side::Direct;
}

struct Options {
  std::string matrix_path;
  std::string rhs_path;
  std::string method = "cg";
  std::string inner;
  std::string side;
  double omega = 1.0;
  std::size_t inner_steps = 1;
  double tol = 1e-10;
  std::size_t max_outer = 0;
  std::string output_path;
  std::string format = "json";
  std::string history_path;
  bool include_x = false;
  std::uint64_t seed = 42;
  std::vector<std::string> methods{"cgls", "lsmr"};
  std::vector<double> omegas{0.8, 1.0, 1.5};
  std::vector<std::size_t> ells{1, 2, 3};
  bool shape_grid = false;
  bool timing = false;
};

// ---------------------------------------------------------------- IO helpers

/// Writes through a temporary file in the same directory and renames it
/// into place. An empty path means standard output.
inline void write_artifact(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
    f << text;
    f.flush();
    if (!f) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path + "'");
  }
}

inline SparseMatrix load_matrix(const std::string& path) {
  if (path.empty()) throw UsageError("--matrix is required");
  std::ifstream f(path);
  if (!f) throw Error("cannot open matrix file '" + path + "'");
  try {
    return mm::read(f);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline Vector load_vector(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open right-hand side file '" + path + "'");
  try {
    return mm::read_vector(f);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ configuration

inline Method parse_method(const std::string& name, std::ostream& err) {
  if (name == "cg") return Method::cg;
  if (name == "minres") return Method::minres;
  if (name == "cgls") return Method::cgls;
  if (name == "lsqr") {
    err << "note: --method lsqr is an alias for cgls (mathematically equivalent); prefer cgls\n";
    return Method::cgls;
  }
  if (name == "lsmr") return Method::lsmr;
  if (name == "cgne") return Method::cgne;
  if (name == "mrne") return Method::mrne;
  throw UsageError("unknown method '" + name + "'");
}

/// Splitting kind for a method; direct names are mapped to their NE
/// counterparts for the least-squares methods.
inline SplittingKind resolve_kind(const std::string& inner, Side side) {
  if (inner.empty()) return side == Side::Direct ? SplittingKind::SSOR : SplittingKind::NESSOR;
  const auto k = parse_splitting_kind(inner);
  if (!k) throw UsageError("unknown inner splitting '" + inner + "'");
  if (side == Side::Direct && is_normal_kind(*k)) {
    throw UsageError("inner splitting '" + inner + "' needs a least-squares or minimum-norm method");
  }
  if (side != Side::Direct && !is_normal_kind(*k)) {
    throw UsageError("inner splitting '" + inner + "' cannot be used with a normal-equations method; use " +
                     std::string(to_string(kind_for_side(*k, side))));
  }
  return *k;
}

inline Side parse_side(const std::string& s, SplittingKind kind) {
  if (!is_normal_kind(kind)) {
    if (!s.empty() && s != "direct") throw UsageError("side '" + s + "' requires a normal-equations splitting");
    return Side::Direct;
  }
  if (s.empty() || s == "normal-left" || s == "left") return Side::NormalLeft;
  if (s == "normal-right" || s == "right") return Side::NormalRight;
  throw UsageError("unknown side '" + s + "'");
}

inline SolverConfig solver_config(const Options& o) {
  SolverConfig cfg;
  cfg.tol = o.tol;
  cfg.max_outer = o.max_outer;
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  return cfg;
}

/// Flips the preconditioner when C(l) is negative definite. The sign of M
/// is read off cheaply; for even l the sign of M + N decides, which needs a
/// dense check and is only done within the dense size cap.
inline InnerPreconditioner orient(const InnerPreconditioner& p, bool* flipped) {
  *flipped = false;
  const Splitting& s = p.splitting();
  double m_sign = 0.0;
  const auto d = s.diag();
  const bool d_pos = std::all_of(d.begin(), d.end(), [](double v) { return v > 0.0; });
  const bool d_neg = std::all_of(d.begin(), d.end(), [](double v) { return v < 0.0; });
  const double w = s.omega();
  if (s.kind() == SplittingKind::Richardson || s.kind() == SplittingKind::RichardsonNE) {
    m_sign = w > 0 ? 1.0 : -1.0;
  } else if (is_jacobi_family(s.kind())) {
    m_sign = d_pos ? (w > 0 ? 1.0 : -1.0) : d_neg ? (w > 0 ? -1.0 : 1.0) : 0.0;
  } else {
    m_sign = d_pos ? (w * (2.0 - w) > 0 ? 1.0 : -1.0) : 0.0;
  }
  if (m_sign >= 0.0) return p;
  if (p.ell() % 2 == 1) {
    *flipped = true;
    return p.negated();
  }
  if (p.dimension() > kDenseCap) return p;
  const DenseMatrix mpn = 2.0 * splitting_matrix_dense(s) - induced_dense(s);
  if (classify(mpn, Subject::MPlusN).verdict == Verdict::SND) {
    *flipped = true;
    return p.negated();
  }
  return p;
}

// --------------------------------------------------------------------- solve

inline int run_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const Method method = parse_method(o.method, err);
  const Side side = side_of(method);
  const SplittingKind kind = resolve_kind(o.inner, side);
  if (o.format != "json" && o.format != "csv") throw UsageError("--format must be json or csv");
  if (o.rhs_path.empty()) throw UsageError("--rhs is required");
  const SparseMatrix a = load_matrix(o.matrix_path);
  const Vector b = load_vector(o.rhs_path);
  if (b.size() != a.rows()) {
    throw DimensionError("right-hand side dimension mismatch: matrix has " + std::to_string(a.rows()) +
                         " rows, rhs has " + std::to_string(b.size()) + " entries");
  }
  const SolverConfig cfg = solver_config(o);
  bool flipped = false;
  const InnerPreconditioner prec = orient(InnerPreconditioner(Splitting(kind, o.omega, a, side), o.inner_steps),
                                          &flipped);

  SolveResult inner;
  Vector x;
  double ls_res = 0.0, normal_res = 0.0;
  const bool lsq = side != Side::Direct;
  if (!lsq) {
    const Vector x0(a.cols(), 0.0);
    inner = method == Method::cg ? pcg(SparseOperator(a), prec, b, x0, cfg)
                                 : pminres(SparseOperator(a), prec, b, x0, cfg);
    x = inner.x;
  } else {
    const LsqProblem prob{a, b, side == Side::NormalLeft ? LsqKind::LeastSquares : LsqKind::MinNorm};
    LsqResult r;
    switch (method) {
      case Method::cgls: r = cgls(prob, prec, cfg); break;
      case Method::lsmr: r = lsmr(prob, prec, cfg); break;
      case Method::cgne: r = cgne(prob, prec, cfg); break;
      default: r = mrne(prob, prec, cfg); break;
    }
    inner = std::move(r.inner);
    x = std::move(r.x);
    ls_res = r.ls_residual_norm;
    normal_res = r.normal_residual_norm;
  }

  std::string text;
  if (o.format == "json") {
    Json j;
    j["command"] = "solve";
    j["method"] = std::string(to_string(method));
    j["inner"] = std::string(to_string(kind));
    j["side"] = std::string(to_string(side));
    j["omega"] = report::number(o.omega);
    j["inner_steps"] = o.inner_steps;
    j["preconditioner_negated"] = flipped;
    j["rows"] = a.rows();
    j["cols"] = a.cols();
    j["result"] = report::to_json(inner);
    if (lsq) {
      j["ls_residual_norm"] = report::number(ls_res);
      j["normal_residual_norm"] = report::number(normal_res);
    }
    if (o.include_x) j["x"] = report::vector_json(x);
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream s;
    s << "method,inner,omega,inner_steps,iterations,termination,initial_residual,final_residual";
    if (lsq) s << ",ls_residual_norm,normal_residual_norm";
    s << "\n"
      << to_string(method) << ',' << to_string(kind) << ',' << fmt(o.omega) << ',' << o.inner_steps << ','
      << inner.iterations << ',' << to_string(inner.termination) << ',' << fmt(inner.initial_residual) << ','
      << fmt(inner.final_residual);
    if (lsq) s << ',' << fmt(ls_res) << ',' << fmt(normal_res);
    s << "\n";
    text = s.str();
  }
  write_artifact(o.output_path, text, out);
  if (!o.history_path.empty()) write_artifact(o.history_path, inner.history.to_csv(), out);
  if (inner.termination != Termination::converged) {
    err << "solve: " << to_string(inner.termination) << " after " << inner.iterations << " iterations\n";
  }
  return exit_code(inner.termination);
}

// ------------------------------------------------------------------- analyze

inline Json omega_report(const Splitting& s) {
  const DenseMatrix a = induced_dense(s);
  Json j;
  if (s.kind() == SplittingKind::Richardson || s.kind() == SplittingKind::RichardsonNE) {
    j["rule"] = "M + N SPD with M = I / omega";
    j["m_plus_n_spd"] = report::to_json(omega_interval_shifted(a, DenseMatrix::Identity(a.rows(), a.rows())));
  } else if (is_jacobi_family(s.kind())) {
    j["rule"] = "M + N SPD with M = D / omega";
    const DenseVector d = a.diagonal();
    if ((d.array() > 0.0).all()) {
      j["m_plus_n_spd"] = report::to_json(omega_interval_shifted(a, DenseMatrix(d.asDiagonal())));
    } else {
      j["m_plus_n_spd"] = nullptr;
      j["note"] = "diagonal is not positive; interval rule does not apply";
    }
  } else {
    j["rule"] = "SSOR C(l) SPD";
    try {
      const SsorOmegaIntervals ss = ssor_omega_intervals(a);
      j["odd_ell"] = report::to_json(ss.odd_ell);
      j["even_ell"] = report::to_json(ss.even_ell);
      j["mu"] = report::number(ss.mu);
      j["rho_s"] = report::number(ss.rho_s);
    } catch (const NotDefiniteError& e) {
      j["note"] = e.what();
    }
  }
  return j;
}

inline int run_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const SplittingKind kind = [&] {
    const auto k = parse_splitting_kind(o.inner.empty() ? "ssor" : o.inner);
    if (!k) throw UsageError("unknown inner splitting '" + o.inner + "'");
    return *k;
  }();
  const Side side = parse_side(o.side, kind);
  const SparseMatrix a = load_matrix(o.matrix_path);
  const std::size_t n = side == Side::NormalRight ? a.rows() : a.cols();
  require_dense_cap(std::max({n, a.rows(), a.cols()}), "analyze");
  const InnerPreconditioner p(Splitting(kind, o.omega, a, side), o.inner_steps);

  Json j;
  j["command"] = "analyze";
  j["inner"] = std::string(to_string(kind));
  j["side"] = std::string(to_string(side));
  j["omega"] = report::number(o.omega);
  j["inner_steps"] = o.inner_steps;
  j["dimension"] = n;
  const DefinitenessTriple t = check_definiteness(p);
  j["definiteness"] = report::to_json(t);
  j["predicting_subject"] = std::string(to_string(predicting_report(t, p.ell()).subject));
  const SpectralSummary s = spectral_summary(p);
  j["spectrum"] = report::to_json(s);
  j["kappa_closed_form"] = report::number(kappa_closed_form(s, p.ell()));
  try {
    const InnerPreconditioner oriented = t.c_ell.verdict == Verdict::SND ? p.negated() : p;
    j["kappa_ell"] = report::number(kappa_ell(oriented));
  } catch (const Error& e) {
    j["kappa_ell"] = nullptr;
    j["kappa_ell_note"] = e.what();
  }
  j["omega_intervals"] = omega_report(p.splitting());
  write_artifact(o.output_path, j.dump(2) + "\n", out);
  (void)err;
  return kOk;
}

// --------------------------------------------------------------------- bound

inline int run_bound(const Options& o, std::ostream& out, std::ostream& err) {
  const Method method = parse_method(o.method == "cg" ? "minres" : o.method, err);
  if (method != Method::minres && method != Method::lsmr && method != Method::mrne) {
    throw UsageError("bound applies to the minimal-residual methods: minres, lsmr, mrne");
  }
  const Side side = side_of(method);
  const SplittingKind kind = resolve_kind(o.inner, side);
  const SparseMatrix a = load_matrix(o.matrix_path);
  const std::size_t n = side == Side::NormalRight ? a.rows() : a.cols();
  require_dense_cap(std::max({n, a.rows(), a.cols()}), "bound");

  Vector b;
  if (o.rhs_path.empty()) {
    b = spmv(a, Vector(a.cols(), 1.0));  // in R(A) by construction
  } else {
    b = load_vector(o.rhs_path);
    if (b.size() != a.rows()) {
      throw DimensionError("right-hand side dimension mismatch: matrix has " + std::to_string(a.rows()) +
                           " rows, rhs has " + std::to_string(b.size()) + " entries");
    }
  }

  InnerPreconditioner p(Splitting(kind, o.omega, a, side), o.inner_steps);
  const DefinitenessTriple t = check_definiteness(p);
  if (t.c_ell.verdict == Verdict::SND) p = p.negated();
  if (t.c_ell.verdict != Verdict::SPD && t.c_ell.verdict != Verdict::SND) {
    throw HypothesisError("bound: C(l) is not definite (verdict " + std::string(to_string(t.c_ell.verdict)) + ")");
  }
  const DenseMatrix induced = induced_dense(p.splitting());
  detail::require_spsd(induced, "bound");

  // The system actually solved and its right-hand side.
  const Vector rhs = side == Side::NormalLeft ? spmv_t(a, b) : b;
  {
    const DenseVector rv = to_eigen(rhs);
    const DenseVector off = rv - induced * (pinv_sym(induced) * rv);
    if (off.norm() > 1e-10 * std::max(1.0, rv.norm())) {
      throw HypothesisError("bound: right-hand side is not in the range of the induced matrix");
    }
  }
  (void)mr_bound_parts(p, 0);  // throws when H is not semiconvergent

  DenseMatrix c = materialize_dense(p).C;
  if (p.is_negated()) c = -c;
  const DenseMatrix half = sqrt_sym_pd(0.5 * (c + c.transpose()));
  std::vector<double> weighted;
  SolverConfig cfg = solver_config(o);
  cfg.observer = [&](std::size_t, std::span<const double> iterate) {
    const DenseVector r = to_eigen(rhs) - induced * to_eigen(iterate);
    weighted.push_back((half * r).norm());
  };
  SolveResult res;
  if (method == Method::minres) {
    res = pminres(SparseOperator(a), p, rhs, Vector(n, 0.0), cfg);
  } else if (method == Method::lsmr) {
    res = lsmr(LsqProblem{a, b, LsqKind::LeastSquares}, p, cfg).inner;
  } else {
    res = mrne(LsqProblem{a, b, LsqKind::MinNorm}, p, cfg).inner;
  }

  const std::size_t rows = weighted.size();
  const MrBoundParts parts = mr_bound_parts(p, rows ? rows - 1 : 0);
  std::ostringstream s;
  s << "k,measured,bound_nu,bound_kappa,bound_min\n";
  bool violated = false;
  const double w0 = rows ? weighted[0] : 0.0;
  for (std::size_t k = 0; k < rows; ++k) {
    const double measured = w0 > 0.0 ? weighted[k] / w0 : 0.0;
    if (measured > parts.min.values[k] + 1e-8) violated = true;
    s << k << ',' << fmt(measured) << ',' << fmt(parts.nu.values[k]) << ',' << fmt(parts.kappa.values[k]) << ','
      << fmt(parts.min.values[k]) << "\n";
  }
  write_artifact(o.output_path, s.str(), out);
  if (violated) {
    err << "bound: measured residual exceeds the bound; this indicates an implementation error\n";
    return kBoundViolation;
  }
  return exit_code(res.termination);
}

// --------------------------------------------------------------------- bench

/// m x n matrix of the given rank, U S V^T with orthonormal random factors
/// and singular values in [1, 10], stored densely as sparse.
inline SparseMatrix bench_matrix(std::mt19937_64& rng, std::size_t m, std::size_t n, std::size_t rank) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto orth = [&](std::size_t rows) {
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      for (Eigen::Index j = 0; j < raw.cols(); ++j) raw(i, j) = g(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    return Eigen::MatrixXd(Eigen::MatrixXd(qr.householderQ()).leftCols(static_cast<Eigen::Index>(rank)));
  };
  const Eigen::MatrixXd u = orth(m);
  const Eigen::MatrixXd v = orth(n);
  std::uniform_real_distribution<double> sv(1.0, 10.0);
  Eigen::VectorXd s(static_cast<Eigen::Index>(rank));
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = sv(rng);
  const DenseMatrix a = u * s.asDiagonal() * v.transpose();
  return to_sparse(a);
}

struct BenchProblem {
  std::string id;
  SparseMatrix a;
  Vector b_ls;  // arbitrary right-hand side
  Vector b_mn;  // consistent right-hand side A x
};

inline std::vector<BenchProblem> bench_problems(const Options& o) {
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  struct Shape {
    std::size_t m, n, rank;
  };
  std::vector<Shape> shapes;
  if (o.shape_grid) {
    for (std::size_t m : {20u, 40u}) {
      for (std::size_t n : {20u, 40u}) {
        shapes.push_back({m, n, std::min(m, n)});
        shapes.push_back({m, n, std::min(m, n) * 3 / 5});
      }
    }
  } else {
    shapes.push_back({60, 40, 25});
  }
  std::vector<BenchProblem> out;
  for (const auto& sh : shapes) {
    BenchProblem p;
    p.id = std::to_string(sh.m) + "x" + std::to_string(sh.n) + "r" + std::to_string(sh.rank);
    p.a = bench_matrix(rng, sh.m, sh.n, sh.rank);
    p.b_ls.resize(sh.m);
    for (auto& v : p.b_ls) v = g(rng);
    Vector xr(sh.n);
    for (auto& v : xr) v = g(rng);
    p.b_mn = spmv(p.a, xr);
    out.push_back(std::move(p));
  }
  return out;
}

inline int run_bench(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.methods.empty() || o.omegas.empty() || o.ells.empty()) {
    throw UsageError("bench grid is empty; give at least one method, omega and inner-step count");
  }
  if (o.format != "json" && o.format != "csv") throw UsageError("--format must be json or csv");
  std::vector<Method> methods;
  for (const auto& name : o.methods) {
    const Method m = parse_method(name, err);
    if (side_of(m) == Side::Direct) throw UsageError("bench runs least-squares and minimum-norm methods only");
    methods.push_back(m);
  }
  const SplittingKind base = o.inner.empty() ? SplittingKind::NESSOR : [&] {
    const auto k = parse_splitting_kind(o.inner);
    if (!k) throw UsageError("unknown inner splitting '" + o.inner + "'");
    return *k;
  }();
  SolverConfig cfg = solver_config(o);
  cfg.record_history = false;

  const auto problems = bench_problems(o);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "problem,method,inner,omega,inner_steps,iterations,termination,ls_residual_norm,normal_residual_norm";
  if (o.timing) csv << ",wall_ms";
  csv << "\n";
  bool all_converged = true;
  for (const auto& prob : problems) {
    for (Method m : methods) {
      const Side side = side_of(m);
      const SplittingKind kind = kind_for_side(base, side);
      for (double w : o.omegas) {
        for (std::size_t ell : o.ells) {
          const InnerPreconditioner p(Splitting(kind, w, prob.a, side), ell);
          const auto start = std::chrono::steady_clock::now();
          LsqResult r;
          if (side == Side::NormalLeft) {
            const LsqProblem lp{prob.a, prob.b_ls, LsqKind::LeastSquares};
            r = m == Method::cgls ? cgls(lp, p, cfg) : lsmr(lp, p, cfg);
          } else {
            const LsqProblem lp{prob.a, prob.b_mn, LsqKind::MinNorm};
            r = m == Method::cgne ? cgne(lp, p, cfg) : mrne(lp, p, cfg);
          }
          const double ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
          all_converged = all_converged && r.inner.termination == Termination::converged;
          Json row;
          row["problem"] = prob.id;
          row["method"] = std::string(to_string(m));
          row["inner"] = std::string(to_string(kind));
          row["omega"] = report::number(w);
          row["inner_steps"] = ell;
          row["iterations"] = r.inner.iterations;
          row["termination"] = std::string(to_string(r.inner.termination));
          row["ls_residual_norm"] = report::number(r.ls_residual_norm);
          row["normal_residual_norm"] = report::number(r.normal_residual_norm);
          if (o.timing) row["wall_ms"] = ms;
          rows.push_back(row);
          csv << prob.id << ',' << to_string(m) << ',' << to_string(kind) << ',' << fmt(w) << ',' << ell << ','
              << r.inner.iterations << ',' << to_string(r.inner.termination) << ',' << fmt(r.ls_residual_norm)
              << ',' << fmt(r.normal_residual_norm);
          if (o.timing) csv << ',' << fmt(ms);
          csv << "\n";
        }
      }
    }
  }
  if (o.format == "json") {
    Json j;
    j["command"] = "bench";
    j["seed"] = o.seed;
    j["rows"] = rows;
    write_artifact(o.output_path, j.dump(2) + "\n", out);
  } else {
    write_artifact(o.output_path, csv.str(), out);
  }
  return all_converged ? kOk : kNotConverged;
}

// ----------------------------------------------------------------------- run

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Krylov solvers with stationary inner-iteration preconditioning"};
  app.name("innerprec");
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--matrix", o.matrix_path, "Matrix Market file")->required();
    sub->add_option("--inner", o.inner, "inner splitting: richardson, jor, ssor, richardson-ne, cimmino-ne, ne-ssor");
    sub->add_option("--omega", o.omega, "relaxation parameter");
    sub->add_option("--inner-steps", o.inner_steps, "number of inner iterations l")->check(CLI::PositiveNumber);
    sub->add_option("--output", o.output_path, "output file (default: standard output)");
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--method", o.method, "cg, minres, cgls, lsqr, lsmr, cgne, mrne");
    sub->add_option("--tol", o.tol, "relative residual tolerance");
    sub->add_option("--max-outer", o.max_outer, "outer iteration limit (default 10 n)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve a system read from Matrix Market files");
  common(solve);
  solver_flags(solve);
  solve->add_option("--rhs", o.rhs_path, "right-hand side (Matrix Market array or one value per line)");
  solve->add_option("--format", o.format, "json or csv");
  solve->add_option("--history", o.history_path, "write the convergence history as CSV");
  solve->add_flag("--include-x", o.include_x, "include the solution vector in JSON output");

  CLI::App* analyze = app.add_subcommand("analyze", "definiteness, spectrum and admissible omega ranges");
  common(analyze);
  analyze->add_option("--side", o.side, "normal-left or normal-right for NE splittings");

  CLI::App* bound = app.add_subcommand("bound", "measured weighted residuals next to the MR bound");
  common(bound);
  solver_flags(bound);
  bound->add_option("--rhs", o.rhs_path, "right-hand side (default: A times the ones vector)");

  CLI::App* bench = app.add_subcommand("bench", "parameter sweep on generated rank-deficient problems");
  bench->add_option("--seed", o.seed, "random seed");
  bench->add_option("--methods", o.methods, "methods to run")->delimiter(',')->expected(0, -1);
  bench->add_option("--omegas", o.omegas, "relaxation parameters")->delimiter(',')->expected(0, -1);
  bench->add_option("--inner-steps", o.ells, "inner step counts")->delimiter(',')->expected(0, -1);
  bench->add_option("--inner", o.inner, "NE splitting family (default ne-ssor)");
  bench->add_option("--tol", o.tol, "relative residual tolerance");
  bench->add_option("--max-outer", o.max_outer, "outer iteration limit");
  bench->add_option("--format", o.format, "json or csv");
  bench->add_option("--output", o.output_path, "output file (default: standard output)");
  bench->add_flag("--shape-grid", o.shape_grid, "use the 20/40 x 20/40, full/60% rank grid");
  bench->add_flag("--timing", o.timing, "record wall time per run (output no longer reproducible)");

  std::vector<std::string> argv_store{"innerprec"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::erase(o.methods, std::string());

  try {
    if (solve->parsed()) return run_solve(o, out, err);
    if (analyze->parsed()) return run_analyze(o, out, err);
    if (bound->parsed()) return run_bound(o, out, err);
    return run_bench(o, out, err);
  } catch (const SizeCapError& e) {
    err << "error: " << e.what() << "\n";
    return kCapOrHypothesis;
  } catch (const HypothesisError& e) {
    err << "error: hypothesis failed: " << e.what() << "\n";
    return kCapOrHypothesis;
  } catch (const NotDefiniteError& e) {
    err << "error: hypothesis failed: " << e.what() << "\n";
    return kCapOrHypothesis;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

} // namespace innerprec::cli
