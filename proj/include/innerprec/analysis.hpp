#pragma once

// Dense desk-scale analysis of inner-iteration preconditioners: definiteness
// of M, M + N and C(l), admissible relaxation intervals, spectral summaries of
// the iteration matrix, condition numbers and convergence-bound curves.
// Everything here is capped at kDenseCap unknowns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "innerprec/dense.hpp"
#include "innerprec/errors.hpp"
#include "innerprec/splitting.hpp"

namespace innerprec {

enum class Verdict { SPD, SND, Indefinite, SingularSemidefinite };
enum class Subject { M, MPlusN, CEll };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::SPD: return "SPD";
    case Verdict::SND: return "SND";
    case Verdict::Indefinite: return "indefinite";
    case Verdict::SingularSemidefinite: return "singular-semidefinite";
  }
  return "?";
}

inline std::string_view to_string(Subject s) {
  switch (s) {
    case Subject::M: return "M";
    case Subject::MPlusN: return "M+N";
    case Subject::CEll: return "C_ell";
  }
  return "?";
}

struct DefinitenessReport {
  Verdict verdict = Verdict::Indefinite;
  double min_eig = 0.0;
  double max_eig = 0.0;
  Subject subject = Subject::M;
};

/// Relative tolerance for definiteness verdicts.
inline constexpr double kDefinitenessTol = 1e-10;
/// Absolute tolerance for deciding an eigenvalue of H equals 1.
inline constexpr double kUnitEigTol = 1e-10;

inline Verdict classify_extremes(double min_eig, double max_eig) {
  const double tol = kDefinitenessTol * std::max({std::abs(min_eig), std::abs(max_eig), 1.0});
  if (min_eig > tol) return Verdict::SPD;
  if (max_eig < -tol) return Verdict::SND;
  if (min_eig >= -tol || max_eig <= tol) return Verdict::SingularSemidefinite;
  return Verdict::Indefinite;
}

inline DefinitenessReport classify(const DenseMatrix& sym, Subject subject) {
  const SymEig e = dense_sym_eig(sym);
  return {classify_extremes(e.min(), e.max()), e.min(), e.max(), subject};
}

/// Distance of the verdict from a definiteness boundary: the smaller extreme
/// eigenvalue magnitude relative to the larger one. Near 0 means a tiny
/// perturbation could change the verdict.
inline double definiteness_margin(const DefinitenessReport& r) {
  const double lo = std::min(std::abs(r.min_eig), std::abs(r.max_eig));
  const double hi = std::max(std::abs(r.min_eig), std::abs(r.max_eig));
  return hi == 0.0 ? 0.0 : lo / hi;
}

struct DefinitenessTriple {
  DefinitenessReport m;
  DefinitenessReport m_plus_n;
  DefinitenessReport c_ell;
};

/// Verdicts the definiteness theorem predicts for C(l): M decides for odd l,
/// M + N for even l.
inline const DefinitenessReport& predicting_report(const DefinitenessTriple& t, std::size_t ell) {
  return ell % 2 == 1 ? t.m : t.m_plus_n;
}

/// Margin below which the theorem's iff is not enforced by check_definiteness.
inline constexpr double kTheoremGuardMargin = 1e-8;

/// Verdicts for M, M + N = 2M - A_induced and C(l) from dense
/// eigendecompositions. Throws ConsistencyError if the computed verdicts
/// contradict the definiteness theorem away from a verdict boundary.
inline DefinitenessTriple check_definiteness(const InnerPreconditioner& p) {
  const std::size_t n = p.dimension();
  require_dense_cap(n, "check_definiteness");
  const DenseMatrix m = splitting_matrix_dense(p.splitting());
  const DenseMatrix a = induced_dense(p.splitting());
  const DenseMatrix c = materialize_dense(p).C;
  if (asymmetry(c) > 1e-10 * std::max(1.0, max_abs(c))) {
    throw ConsistencyError("materialized C(l) is not symmetric (max asymmetry " +
                           std::to_string(asymmetry(c)) + ")");
  }
  DefinitenessTriple t{classify(m, Subject::M), classify(2.0 * m - a, Subject::MPlusN),
                       classify(c, Subject::CEll)};
  const DefinitenessReport& pred = predicting_report(t, p.ell());
  const bool conflict = (pred.verdict == Verdict::SPD) != (t.c_ell.verdict == Verdict::SPD) ||
                        (pred.verdict == Verdict::SND) != (t.c_ell.verdict == Verdict::SND);
  if (conflict && definiteness_margin(pred) >= kTheoremGuardMargin &&
      definiteness_margin(t.c_ell) >= kTheoremGuardMargin) {
    throw ConsistencyError("C(l) verdict " + std::string(to_string(t.c_ell.verdict)) +
                           " contradicts " + std::string(to_string(pred.subject)) + " verdict " +
                           std::string(to_string(pred.verdict)));
  }
  return t;
}

/// Open interval (lo, hi); endpoints may be infinite.
struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};

struct OmegaIntervals {
  std::vector<Interval> intervals;
  std::string case_label;

  bool contains(double omega) const {
    return std::any_of(intervals.begin(), intervals.end(),
                       [&](const Interval& i) { return i.contains(omega); });
  }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sorts and merges overlapping open intervals.
inline std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& i : v) {
    if (!(i.lo < i.hi)) continue;
    if (!out.empty() && i.lo < out.back().hi) {
      out.back().hi = std::max(out.back().hi, i.hi);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

/// Relaxation parameters for which 2 omega^{-1} B - A is SPD, with B SPD.
/// With lambda_max the largest eigenvalue of B^{-1/2} A B^{-1/2}:
/// (0, 2/lambda_max) if lambda_max > 0, omega outside [2/lambda_max, 0] if
/// lambda_max < 0, and omega > 0 if lambda_max = 0.
inline OmegaIntervals omega_interval_shifted(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("omega_interval_shifted: A and B differ in shape");
  }
  require_symmetric(a, 1e-10, "omega_interval_shifted");
  require_dense_cap(static_cast<std::size_t>(a.rows()), "omega_interval_shifted");
  DenseMatrix b_inv_half;
  try {
    b_inv_half = inv_sqrt_sym_pd(b);
  } catch (const NotDefiniteError&) {
    throw NotDefiniteError("omega_interval_shifted: B is not SPD");
  }
  const DenseMatrix scaled = b_inv_half * a * b_inv_half;
  const double lmax = dense_sym_eig(0.5 * (scaled + scaled.transpose())).max();
  const double a_norm = dense_sym_eig(a).max_abs();
  OmegaIntervals out;
  if (std::abs(lmax) <= 1e-12 * a_norm || lmax == 0.0) {
    out.intervals = {{0.0, kInf}};
    out.case_label = "lambda_max = 0";
  } else if (lmax > 0.0) {
    out.intervals = {{0.0, 2.0 / lmax}};
    out.case_label = "lambda_max > 0";
  } else {
    out.intervals = {{-kInf, 2.0 / lmax}, {0.0, kInf}};
    out.case_label = "lambda_max < 0";
  }
  return out;
}

struct SsorOmegaIntervals {
  OmegaIntervals odd_ell;
  OmegaIntervals even_ell;  // sufficient only
  double mu = 0.0;
  double rho_s = 0.0;
};

/// Relaxation intervals for which the SSOR inner-iteration preconditioner
/// is SPD. Odd l: exactly (0, 2). Even l: union of the rows of the
/// sufficient-condition table that apply to
///
///   mu    = lambda_min(S) + 1
///   rho_s = lambda_max(S) + 2 lambda_max(D^{-1/2} L D^{-1} L^T D^{-1/2}) + 1
///
/// with S = D^{-1/2} (L + L^T) D^{-1/2} and A = L + D + L^T.
inline SsorOmegaIntervals ssor_omega_intervals(const DenseMatrix& a) {
  require_symmetric(a, 1e-10, "ssor_omega_intervals");
  const auto n = a.rows();
  require_dense_cap(static_cast<std::size_t>(n), "ssor_omega_intervals");
  const DenseVector d = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) == 0.0) throw SplittingError("ssor_omega_intervals: zero diagonal entry at " + std::to_string(i));
    if (d(i) < 0.0) {
      throw NotDefiniteError("ssor_omega_intervals: diagonal must be positive (entry " +
                             std::to_string(i) + " is negative)");
    }
  }
  const DenseVector d_inv_half = d.cwiseSqrt().cwiseInverse();
  const DenseMatrix lower = a.triangularView<Eigen::StrictlyLower>();
  const DenseMatrix s = d_inv_half.asDiagonal() * (lower + lower.transpose()) * d_inv_half.asDiagonal();
  const DenseMatrix q = d_inv_half.asDiagonal() * lower * d.cwiseInverse().asDiagonal() *
                        lower.transpose() * d_inv_half.asDiagonal();
  const SymEig es = dense_sym_eig(0.5 * (s + s.transpose()));
  const SymEig eq = dense_sym_eig(0.5 * (q + q.transpose()));

  SsorOmegaIntervals out;
  out.mu = es.min() + 1.0;
  out.rho_s = es.max() + 2.0 * eq.max() + 1.0;
  out.odd_ell.intervals = {{0.0, 2.0}};
  out.odd_ell.case_label = "odd ell";

  constexpr double kZero = 1e-14;
  std::vector<Interval> even;
  std::vector<std::string> fired;
  const double mu = out.mu;
  if (std::abs(mu) <= kZero) {
    even.push_back({0.0, 1.0});
    fired.push_back("mu = 0");
  } else if (mu < 0.5) {
    even.push_back({0.0, (1.0 - std::sqrt(1.0 - 2.0 * mu)) / mu});
    fired.push_back("mu < 1/2");
  } else {
    even.push_back({0.0, 2.0});
    fired.push_back("mu >= 1/2");
  }
  const double rho = out.rho_s;
  if (std::abs(rho) <= kZero) {
    even.push_back({2.0, kInf});
    fired.push_back("rho_s = 0");
  } else if (rho < 0.0) {
    even.push_back({-kInf, (1.0 + std::sqrt(1.0 - 2.0 * rho)) / rho});
    even.push_back({2.0, kInf});
    fired.push_back("rho_s < 0");
  } else if (rho < 0.5) {
    even.push_back({2.0, (1.0 + std::sqrt(1.0 - 2.0 * rho)) / rho});
    fired.push_back("rho_s in (0, 1/2)");
  } else {
    fired.push_back("rho_s >= 1/2 (no rho_s case)");
  }
  out.even_ell.intervals = merge_intervals(std::move(even));
  for (std::size_t i = 0; i < fired.size(); ++i) {
    out.even_ell.case_label += (i ? "; " : "") + fired[i];
  }
  return out;
}

struct SpectralSummary {
  double nu = 0.0;            // max |lambda| over eigenvalues of H other than 1
  double lambda_max_H = 0.0;  // extremes over eigenvalues other than 1
  double lambda_min_H = 0.0;
  double delta = 0.0;         // eigenvalue of smallest magnitude
  bool semiconvergent = false;
  bool unit_eigs_simple = true;
  bool real_spectrum = true;
  std::size_t unit_multiplicity = 0;
};

namespace detail {

/// Sign of a definite splitting matrix: +1 SPD, -1 SND, 0 otherwise.
inline int definite_sign(const DenseMatrix& m) {
  const SymEig e = dense_sym_eig(m);
  switch (classify_extremes(e.min(), e.max())) {
    case Verdict::SPD: return 1;
    case Verdict::SND: return -1;
    default: return 0;
  }
}

inline SpectralSummary summarize(const std::vector<double>& re, const std::vector<double>& im) {
  SpectralSummary s;
  bool any_other = false;
  double best = kInf;
  for (std::size_t i = 0; i < re.size(); ++i) {
    const double mod = std::hypot(re[i], im[i]);
    if (mod < best) {
      best = mod;
      s.delta = re[i];
    }
    if (std::abs(re[i] - 1.0) <= kUnitEigTol && std::abs(im[i]) <= kUnitEigTol) {
      ++s.unit_multiplicity;
      continue;
    }
    s.nu = std::max(s.nu, mod);
    s.lambda_max_H = any_other ? std::max(s.lambda_max_H, re[i]) : re[i];
    s.lambda_min_H = any_other ? std::min(s.lambda_min_H, re[i]) : re[i];
    any_other = true;
    if (std::abs(im[i]) > 1e-8) s.real_spectrum = false;
  }
  return s;
}

} // namespace detail

/// Spectrum of H = M^{-1} N. When M is definite the eigenvalues are taken
/// from the symmetric similarity transform |M|^{1/2} H |M|^{-1/2}, so they
/// are real and the unit eigenvalues are semisimple. Otherwise a general
/// eigensolver is used and simplicity of the unit eigenvalues is checked by
/// comparing rank(H - I) with their multiplicity.
inline SpectralSummary spectral_summary(const InnerPreconditioner& p) {
  const std::size_t n = p.dimension();
  require_dense_cap(n, "spectral_summary");
  const auto ni = static_cast<Eigen::Index>(n);
  const DenseMatrix m = splitting_matrix_dense(p.splitting());
  const int sign = detail::definite_sign(m);
  std::vector<double> re;
  std::vector<double> im;
  SpectralSummary s;
  if (sign != 0) {
    const DenseMatrix a = induced_dense(p.splitting());
    const DenseMatrix s_inv = inv_sqrt_sym_pd(static_cast<double>(sign) * m);
    const DenseMatrix t = DenseMatrix::Identity(ni, ni) - static_cast<double>(sign) * (s_inv * a * s_inv);
    const SymEig e = dense_sym_eig(0.5 * (t + t.transpose()));
    re.assign(e.eigenvalues.data(), e.eigenvalues.data() + e.eigenvalues.size());
    im.assign(re.size(), 0.0);
    s = detail::summarize(re, im);
  } else {
    const DenseMatrix h = materialize_dense(p).H;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(h, false);
    if (solver.info() != Eigen::Success) throw Error("spectral_summary: eigensolver did not converge");
    for (Eigen::Index i = 0; i < ni; ++i) {
      re.push_back(solver.eigenvalues()(i).real());
      im.push_back(solver.eigenvalues()(i).imag());
    }
    s = detail::summarize(re, im);
    if (s.unit_multiplicity > 0) {
      const Eigen::MatrixXd shifted = h - DenseMatrix::Identity(ni, ni);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted);
      const auto sv = svd.singularValues();
      const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
      std::size_t rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cut) ++rank;
      }
      s.unit_eigs_simple = rank == n - s.unit_multiplicity;
    }
  }
  s.semiconvergent = s.nu < 1.0 && s.unit_eigs_simple;
  return s;
}

namespace detail {

/// C(l) with the preconditioner's sign flip applied; must be SPD.
inline DenseMatrix oriented_spd_c(const InnerPreconditioner& p, const char* what) {
  DenseMatrix c = materialize_dense(p).C;
  if (p.is_negated()) c = -c;
  c = 0.5 * (c + c.transpose());
  const SymEig e = dense_sym_eig(c);
  if (classify_extremes(e.min(), e.max()) != Verdict::SPD) {
    throw NotDefiniteError(std::string(what) + ": C(l) is not SPD (eigenvalues in [" +
                           std::to_string(e.min()) + ", " + std::to_string(e.max()) + "])");
  }
  return c;
}

inline void require_spsd(const DenseMatrix& a, const char* what) {
  const SymEig e = dense_sym_eig(a);
  const double tol = kDefinitenessTol * std::max(e.max_abs(), 1.0);
  if (e.min() < -tol) {
    throw HypothesisError(std::string(what) + ": induced matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(e.min()) + ")");
  }
}

} // namespace detail

/// Condition number of C(l) A_induced = I - H^l over its nonzero spectrum,
/// computed from the symmetric form C^{1/2} A C^{1/2}.
inline double kappa_ell(const InnerPreconditioner& p) {
  require_dense_cap(p.dimension(), "kappa_ell");
  const DenseMatrix a = induced_dense(p.splitting());
  detail::require_spsd(a, "kappa_ell");
  const DenseMatrix c = detail::oriented_spd_c(p, "kappa_ell");
  const DenseMatrix half = sqrt_sym_pd(c);
  const DenseMatrix k = half * a * half;
  const SymEig e = dense_sym_eig(0.5 * (k + k.transpose()));
  const double cut = 1e-12 * e.max();
  double lo = kInf;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
    if (e.eigenvalues(i) > cut) lo = std::min(lo, e.eigenvalues(i));
  }
  if (!(e.max() > 0.0) || lo == kInf) {
    throw HypothesisError("kappa_ell: preconditioned matrix has no nonzero eigenvalues");
  }
  return e.max() / lo;
}

/// Closed-form condition number expressed through the spectrum of H, as
/// tabulated for odd and even l. Reported for comparison with kappa_ell;
/// the odd-l expression carries no l exponent.
inline double kappa_closed_form(const SpectralSummary& s, std::size_t ell) {
  if (ell % 2 == 1) return (1.0 - s.lambda_max_H) / (1.0 - s.lambda_min_H);
  const double l = static_cast<double>(ell);
  return (1.0 - std::pow(s.delta, l)) / (1.0 - std::pow(s.nu, l));
}

enum class BoundKind { MrNu, MrKappa, MrMin, CgKappa };

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::MrNu: return "MR-nu";
    case BoundKind::MrKappa: return "MR-kappa";
    case BoundKind::MrMin: return "MR-min";
    case BoundKind::CgKappa: return "CG-kappa";
  }
  return "?";
}

/// values[k] bounds the relative residual (or error) after k iterations.
struct BoundCurve {
  BoundKind kind = BoundKind::MrMin;
  std::vector<double> values;
};

struct MrBoundParts {
  BoundCurve nu;     // nu(H)^{k l}
  BoundCurve kappa;  // 2 ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^k
  BoundCurve min;
  SpectralSummary spectrum;
  double kappa_value = 0.0;
};

inline double chebyshev_ratio(double kappa) {
  const double r = std::sqrt(kappa);
  return (r - 1.0) / (r + 1.0);
}

/// Residual bound for MR with l inner steps on an SPSD induced matrix with
/// semiconvergent H, measured in the C^{1/2}-weighted residual norm.
inline MrBoundParts mr_bound_parts(const InnerPreconditioner& p, std::size_t k_max) {
  const SpectralSummary s = spectral_summary(p);
  if (!s.semiconvergent) {
    throw HypothesisError("mr_bound_curve: H is not semiconvergent (nu(H) = " + std::to_string(s.nu) +
                          (s.unit_eigs_simple ? "" : ", unit eigenvalues not simple") + ")");
  }
  detail::require_spsd(induced_dense(p.splitting()), "mr_bound_curve");
  MrBoundParts out;
  out.spectrum = s;
  out.kappa_value = kappa_ell(p);
  out.nu.kind = BoundKind::MrNu;
  out.kappa.kind = BoundKind::MrKappa;
  out.min.kind = BoundKind::MrMin;
  const double q = chebyshev_ratio(out.kappa_value);
  const double l = static_cast<double>(p.ell());
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double kk = static_cast<double>(k);
    const double bn = std::pow(s.nu, kk * l);
    const double bk = k == 0 ? 1.0 : 2.0 * std::pow(q, kk);
    out.nu.values.push_back(bn);
    out.kappa.values.push_back(bk);
    out.min.values.push_back(std::min(bn, bk));
  }
  return out;
}

inline BoundCurve mr_bound_curve(const InnerPreconditioner& p, std::size_t k_max) {
  return mr_bound_parts(p, k_max).min;
}

/// A-seminorm error bound for CG with l inner steps. Values are capped at 1
/// since the CG error in that seminorm never grows.
inline BoundCurve cg_bound_curve(const InnerPreconditioner& p, std::size_t k_max) {
  const double q = chebyshev_ratio(kappa_ell(p));
  BoundCurve out{BoundKind::CgKappa, {}};
  for (std::size_t k = 0; k <= k_max; ++k) {
    out.values.push_back(std::min(1.0, 2.0 * std::pow(q, static_cast<double>(k))));
  }
  return out;
}

/// The solution a preconditioned Krylov method with SPD preconditioner
/// C = P^{-1} reaches from x0:
///
///   x = C^{1/2} Ahat^+ bhat + C^{1/2} (I - Ahat Ahat^+) C^{-1/2} x0,
///
/// with Ahat = C^{1/2} A C^{1/2} and bhat = C^{1/2} b.
inline Vector solution_form_oracle(const DenseMatrix& a, const DenseMatrix& c, std::span<const double> b,
                                   std::span<const double> x0) {
  require_symmetric(a, 1e-10, "solution_form_oracle");
  const auto n = static_cast<std::size_t>(a.rows());
  require_same_length(c.rows(), a.rows(), "solution_form_oracle C");
  require_same_length(b.size(), n, "solution_form_oracle b");
  require_same_length(x0.size(), n, "solution_form_oracle x0");
  require_dense_cap(n, "solution_form_oracle");
  DenseMatrix half;
  DenseMatrix inv_half;
  try {
    half = sqrt_sym_pd(c);
    inv_half = inv_sqrt_sym_pd(c);
  } catch (const NotDefiniteError&) {
    throw NotDefiniteError("solution_form_oracle: C is not SPD");
  }
  const DenseVector bv = to_eigen(b);
  const DenseMatrix a_pinv = pinv_sym(a);
  const DenseVector outside = bv - a * (a_pinv * bv);
  if (outside.norm() > 1e-10 * std::max(1.0, bv.norm())) {
    throw HypothesisError("solution_form_oracle: b is not in the range of A (distance " +
                          std::to_string(outside.norm()) + ")");
  }
  const DenseMatrix ahat = half * a * half;
  const DenseMatrix ahat_pinv = pinv_sym(0.5 * (ahat + ahat.transpose()));
  const DenseVector bhat = half * bv;
  const DenseVector xhat0 = inv_half * to_eigen(x0);
  const auto ni = static_cast<Eigen::Index>(n);
  const DenseVector x =
      half * (ahat_pinv * bhat) + half * ((DenseMatrix::Identity(ni, ni) - ahat * ahat_pinv) * xhat0);
  return to_std(x);
}

} // namespace innerprec
