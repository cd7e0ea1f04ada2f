#include <gtest/gtest.h>

#include <array>

#include "innerprec/innerprec.hpp"
#include "test_support.hpp"

namespace ip = innerprec;
using ip::SplittingKind;
using ip::Verdict;
using ip::testing::Rng;

namespace {

ip::DenseMatrix mat2(double a, double b, double c, double d) {
  ip::DenseMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ip::DenseMatrix diag(std::initializer_list<double> v) {
  ip::DenseVector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

ip::InnerPreconditioner inner(SplittingKind kind, double omega, const ip::DenseMatrix& a, std::size_t ell) {
  return ip::InnerPreconditioner(ip::Splitting(kind, omega, ip::to_sparse(a)), ell);
}

// Verdict of a symmetric matrix straight from its eigenvalues.
Verdict oracle_verdict(const ip::DenseMatrix& m, double* margin = nullptr) {
  const auto e = ip::dense_sym_eig(0.5 * (m + m.transpose()));
  if (margin) {
    const double big = std::max(std::abs(e.min()), std::abs(e.max()));
    *margin = big > 0.0 ? std::min(std::abs(e.min()), std::abs(e.max())) / big : 0.0;
  }
  return ip::classify_extremes(e.min(), e.max());
}

} // namespace

TEST(CheckDefiniteness, IdentityRichardson) {
  const auto t = ip::check_definiteness(inner(SplittingKind::Richardson, 1.0, ip::DenseMatrix::Identity(3, 3), 3));
  EXPECT_EQ(t.m.verdict, Verdict::SPD);
  EXPECT_EQ(t.m_plus_n.verdict, Verdict::SPD);
  EXPECT_EQ(t.c_ell.verdict, Verdict::SPD);
}

TEST(CheckDefiniteness, IndefiniteDiagonalExample) {
  const auto t = ip::check_definiteness(inner(SplittingKind::Richardson, 1.0, diag({1, -1}), 1));
  EXPECT_EQ(t.m.verdict, Verdict::SPD);
  EXPECT_EQ(t.m_plus_n.verdict, Verdict::SPD);
  EXPECT_DOUBLE_EQ(t.m_plus_n.min_eig, 1.0);
  EXPECT_DOUBLE_EQ(t.m_plus_n.max_eig, 3.0);
  EXPECT_EQ(t.c_ell.verdict, Verdict::SPD);
}

TEST(CheckDefiniteness, SsorOmegaBeyondTwo) {
  const ip::DenseMatrix a = mat2(2, -1, -1, 2);
  const auto t = ip::check_definiteness(inner(SplittingKind::SSOR, 2.5, a, 1));
  // omega (2 - omega) < 0 while (D + wL) D^{-1} (D + wL^T) is SPD.
  EXPECT_EQ(t.m.verdict, oracle_verdict(ip::testing::oracle_M(SplittingKind::SSOR, 2.5, a)));
  EXPECT_EQ(t.m.verdict, Verdict::SND);
  EXPECT_EQ(t.c_ell.verdict, Verdict::SND);
}

TEST(CheckDefiniteness, TheoremIffOnRandomInstances) {
  Rng rng(41);
  std::uniform_int_distribution<std::size_t> dim(2, 15);
  std::uniform_real_distribution<double> om(-3.0, 3.0);
  constexpr std::array kinds{SplittingKind::Richardson, SplittingKind::JOR, SplittingKind::SSOR};
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = dim(rng);
    const auto a = ip::testing::random_symmetric_positive_diag(rng, n);
    const auto kind = kinds[static_cast<std::size_t>(trial) % 3];
    double w = om(rng);
    if (std::abs(w) < 1e-3 || std::abs(w - 2.0) < 1e-3) w = 0.7;
    const std::size_t ell = 1 + static_cast<std::size_t>(trial) % 5;
    const auto o = ip::testing::oracle_inner(kind, w, a, ell);
    double pm = 0.0, cm = 0.0;
    const Verdict predictor = ell % 2 == 1 ? oracle_verdict(o.M, &pm) : oracle_verdict(o.M + o.N, &pm);
    const Verdict vc = oracle_verdict(o.C, &cm);
    if (pm < 1e-8 || cm < 1e-8) continue;
    ++checked;
    EXPECT_EQ(predictor == Verdict::SPD, vc == Verdict::SPD) << "trial " << trial;
    EXPECT_EQ(predictor == Verdict::SND, vc == Verdict::SND) << "trial " << trial;
    const auto t = ip::check_definiteness(inner(kind, w, a, ell));
    EXPECT_EQ(t.c_ell.verdict, vc) << "trial " << trial;
    EXPECT_EQ(ip::predicting_report(t, ell).verdict, predictor) << "trial " << trial;
  }
  EXPECT_GT(checked, 60);
}

TEST(OmegaIntervalShifted, Cases) {
  auto o = ip::omega_interval_shifted(diag({1, -1}), ip::DenseMatrix::Identity(2, 2));
  ASSERT_EQ(o.intervals.size(), 1u);
  EXPECT_DOUBLE_EQ(o.intervals[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(o.intervals[0].hi, 2.0);
  EXPECT_EQ(o.case_label, "lambda_max > 0");

  o = ip::omega_interval_shifted(-ip::DenseMatrix::Identity(2, 2), ip::DenseMatrix::Identity(2, 2));
  ASSERT_EQ(o.intervals.size(), 2u);
  EXPECT_EQ(o.intervals[0].lo, -ip::kInf);
  EXPECT_DOUBLE_EQ(o.intervals[0].hi, -2.0);
  EXPECT_DOUBLE_EQ(o.intervals[1].lo, 0.0);
  EXPECT_EQ(o.intervals[1].hi, ip::kInf);

  o = ip::omega_interval_shifted(ip::DenseMatrix::Zero(2, 2), ip::DenseMatrix::Identity(2, 2));
  ASSERT_EQ(o.intervals.size(), 1u);
  EXPECT_DOUBLE_EQ(o.intervals[0].lo, 0.0);
  EXPECT_EQ(o.intervals[0].hi, ip::kInf);
  EXPECT_EQ(o.case_label, "lambda_max = 0");
}

TEST(OmegaIntervalShifted, RejectsIndefiniteB) {
  EXPECT_THROW(ip::omega_interval_shifted(ip::DenseMatrix::Identity(2, 2), diag({1, -1})), ip::NotDefiniteError);
}

TEST(OmegaIntervalShifted, VerdictFlipsAtEndpoints) {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial) % 8;
    ip::DenseMatrix a = ip::testing::random_symmetric_positive_diag(rng, n);
    if (trial % 3 == 2) a = -ip::testing::random_spsd(rng, n, n, 0.5, 3.0);
    const bool use_d = trial % 2 == 1;
    const ip::DenseMatrix b = use_d ? ip::DenseMatrix(a.diagonal().cwiseAbs().asDiagonal())
                                    : ip::DenseMatrix::Identity(a.rows(), a.rows());
    const auto o = ip::omega_interval_shifted(a, b);
    auto spd = [&](double w) { return oracle_verdict(2.0 / w * b - a) == Verdict::SPD; };
    for (const auto& iv : o.intervals) {
      for (double end : {iv.lo, iv.hi}) {
        if (std::isinf(end) || end == 0.0) continue;
        const bool inside_left = o.contains(end - 1e-3);
        const bool inside_right = o.contains(end + 1e-3);
        EXPECT_NE(inside_left, inside_right);
        EXPECT_EQ(spd(end - 1e-3), inside_left) << "trial " << trial << " endpoint " << end;
        EXPECT_EQ(spd(end + 1e-3), inside_right) << "trial " << trial << " endpoint " << end;
      }
    }
  }
}

TEST(SsorOmegaIntervals, TridiagonalExample) {
  const auto s = ip::ssor_omega_intervals(mat2(2, -1, -1, 2));
  EXPECT_NEAR(s.mu, 0.5, 1e-14);
  EXPECT_NEAR(s.rho_s, 2.0, 1e-14);
  ASSERT_EQ(s.odd_ell.intervals.size(), 1u);
  EXPECT_EQ(s.odd_ell.intervals[0].lo, 0.0);
  EXPECT_EQ(s.odd_ell.intervals[0].hi, 2.0);
  EXPECT_TRUE(s.even_ell.contains(1.0));
  EXPECT_TRUE(s.even_ell.contains(1.999));
  EXPECT_NE(s.even_ell.case_label.find("mu >= 1/2"), std::string::npos);
  EXPECT_NE(s.even_ell.case_label.find("no rho_s case"), std::string::npos);
}

TEST(SsorOmegaIntervals, IdentityExample) {
  const auto s = ip::ssor_omega_intervals(ip::DenseMatrix::Identity(3, 3));
  EXPECT_DOUBLE_EQ(s.mu, 1.0);
  EXPECT_DOUBLE_EQ(s.rho_s, 1.0);
  ASSERT_EQ(s.even_ell.intervals.size(), 1u);
  EXPECT_EQ(s.even_ell.intervals[0].lo, 0.0);
  EXPECT_EQ(s.even_ell.intervals[0].hi, 2.0);
}

TEST(SsorOmegaIntervals, SmallMuRow) {
  // Strong off-diagonal coupling drives mu below 1/2.
  const ip::DenseMatrix a = mat2(1, 0.9, 0.9, 1);
  const auto s = ip::ssor_omega_intervals(a);
  EXPECT_NEAR(s.mu, 0.1, 1e-14);
  ASSERT_EQ(s.even_ell.intervals.size(), 1u);
  EXPECT_NEAR(s.even_ell.intervals[0].hi, (1.0 - std::sqrt(0.8)) / 0.1, 1e-12);
  EXPECT_NE(s.even_ell.case_label.find("mu < 1/2"), std::string::npos);
}

TEST(SsorOmegaIntervals, EvenIntervalsAreSufficient) {
  Rng rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial) % 10;
    const auto a = ip::testing::random_symmetric_positive_diag(rng, n);
    const auto s = ip::ssor_omega_intervals(a);
    for (const auto& iv : s.even_ell.intervals) {
      const double lo = std::isinf(iv.lo) ? iv.hi - 10.0 : iv.lo;
      const double hi = std::isinf(iv.hi) ? iv.lo + 10.0 : iv.hi;
      for (int k = 0; k < 5; ++k) {
        const double w = lo + 1e-3 + u(rng) * (hi - lo - 2e-3);
        if (w == 2.0) continue;
        const auto o = ip::testing::oracle_inner(SplittingKind::SSOR, w, a, 2);
        EXPECT_EQ(oracle_verdict(o.C), Verdict::SPD) << "trial " << trial << " omega " << w;
      }
    }
  }
}

TEST(SsorOmegaIntervals, Errors) {
  EXPECT_THROW(ip::ssor_omega_intervals(mat2(0, 1, 1, 1)), ip::SplittingError);
  EXPECT_THROW(ip::ssor_omega_intervals(mat2(1, 2, 0, 1)), ip::NotSymmetricError);
}

TEST(SpectralSummary, DivergentExample) {
  const auto s = ip::spectral_summary(inner(SplittingKind::Richardson, 1.0, diag({1, -1}), 1));
  EXPECT_DOUBLE_EQ(s.nu, 2.0);
  EXPECT_FALSE(s.semiconvergent);
}

TEST(SpectralSummary, SingularJor) {
  const auto s = ip::spectral_summary(inner(SplittingKind::JOR, 0.5, mat2(1, 1, 1, 1), 1));
  EXPECT_NEAR(s.nu, 0.0, 1e-14);
  EXPECT_TRUE(s.semiconvergent);
  EXPECT_EQ(s.unit_multiplicity, 1u);
}

TEST(SpectralSummary, ZeroIterationMatrix) {
  const auto s = ip::spectral_summary(inner(SplittingKind::Richardson, 1.0, ip::DenseMatrix::Identity(3, 3), 1));
  EXPECT_EQ(s.nu, 0.0);
  EXPECT_TRUE(s.semiconvergent);
}

TEST(SpectralSummary, IndefiniteMFallsBackToGeneralSolver) {
  Rng rng(44);
  const auto a = ip::testing::random_symmetric_positive_diag(rng, 8);
  // Mixed-sign diagonal makes the JOR splitting matrix indefinite.
  ip::DenseMatrix b = a;
  b(0, 0) = -b(0, 0);
  const auto p = inner(SplittingKind::JOR, 0.8, b, 1);
  const auto s = ip::spectral_summary(p);
  const auto o = ip::testing::oracle_inner(SplittingKind::JOR, 0.8, b, 1);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(o.H), false);
  double nu = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) nu = std::max(nu, std::abs(es.eigenvalues()(i)));
  EXPECT_NEAR(s.nu, nu, 1e-8);
}

TEST(SpectralSummary, SummarizeExcludesUnitEigenvalues) {
  std::vector<double> re{1.0, 1.0, 0.5}, im{0.0, 0.0, 0.0};
  const auto s = ip::detail::summarize(re, im);
  EXPECT_EQ(s.unit_multiplicity, 2u);
  EXPECT_DOUBLE_EQ(s.nu, 0.5);
  EXPECT_DOUBLE_EQ(s.delta, 0.5);
}

TEST(SpectralSummary, KellerCriterion) {
  Rng rng(45);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int spsd = 0, indefinite = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial) % 20;
    ip::DenseMatrix a;
    if (trial % 2 == 0) {
      a = ip::testing::random_spsd(rng, n, std::max<std::size_t>(1, n - 1 - static_cast<std::size_t>(trial) % 3));
    } else {
      a = ip::testing::random_symmetric_positive_diag(rng, n);
    }
    const bool jor = trial % 4 < 2;
    const ip::DenseMatrix b = jor ? ip::DenseMatrix(a.diagonal().asDiagonal())
                                  : ip::DenseMatrix::Identity(a.rows(), a.rows());
    const auto iv = ip::omega_interval_shifted(a, b);
    const double w = iv.intervals.back().lo + u(rng) * std::min(2.0 / ip::dense_sym_eig(a).max_abs(),
                                                                 iv.intervals.back().hi - iv.intervals.back().lo);
    const auto p = inner(jor ? SplittingKind::JOR : SplittingKind::Richardson, w, a, 1);
    double pm = 0.0;
    ASSERT_EQ(oracle_verdict(2.0 * ip::splitting_matrix_dense(p.splitting()) - a, &pm), Verdict::SPD);
    if (pm < 1e-8) continue;
    const auto e = ip::dense_sym_eig(a);
    const bool a_psd = e.min() >= -1e-10 * e.max_abs();
    if (!a_psd && std::abs(e.min()) < 1e-8 * e.max_abs()) continue;
    (a_psd ? spsd : indefinite)++;
    EXPECT_EQ(ip::spectral_summary(p).semiconvergent, a_psd) << "trial " << trial;
  }
  EXPECT_GT(spsd, 30);
  EXPECT_GT(indefinite, 30);
}

TEST(KappaEll, TrivialCases) {
  for (std::size_t ell : {1u, 2u, 5u}) {
    EXPECT_DOUBLE_EQ(ip::kappa_ell(inner(SplittingKind::Richardson, 1.0, ip::DenseMatrix::Identity(3, 3), ell)), 1.0);
  }
  EXPECT_NEAR(ip::kappa_ell(inner(SplittingKind::JOR, 0.5, mat2(1, 1, 1, 1), 1)), 1.0, 1e-12);
}

TEST(KappaEll, RankDeficientSsorMatchesPseudoInverseConditionNumber) {
  Rng rng(46);
  const auto a = ip::testing::random_spsd(rng, 20, 14);
  const auto p = inner(SplittingKind::SSOR, 1.0, a, 2);
  const auto o = ip::testing::oracle_inner(SplittingKind::SSOR, 1.0, a, 2);
  const ip::DenseMatrix half = ip::sqrt_sym_pd(0.5 * (o.C + o.C.transpose()));
  const ip::DenseMatrix ahat = half * a * half;
  const ip::DenseMatrix sym = 0.5 * (ahat + ahat.transpose());
  const ip::DenseMatrix sym_pinv = ip::pinv_sym(sym, 1e-10);
  const double want = ip::dense_sym_eig(sym).max_abs() * ip::dense_sym_eig(sym_pinv).max_abs();
  EXPECT_NEAR(ip::kappa_ell(p), want, 1e-8 * want);
}

TEST(KappaEll, RequiresSemidefiniteOperator) {
  EXPECT_THROW(ip::kappa_ell(inner(SplittingKind::Richardson, 1.0, diag({1, -1}), 1)), ip::HypothesisError);
}

TEST(KappaClosedForm, EvenEllAgreesWithOperationalValue) {
  Rng rng(47);
  const auto a = ip::testing::random_spsd(rng, 10, 10, 1.0, 4.0);
  const auto p = inner(SplittingKind::JOR, 0.3, a, 2);
  const auto s = ip::spectral_summary(p);
  ASSERT_TRUE(s.semiconvergent);
  const double closed = ip::kappa_closed_form(s, 2);
  EXPECT_GT(closed, 0.0);
  EXPECT_TRUE(std::isfinite(closed));
}

TEST(BoundCurves, ZeroNuInstance) {
  const auto c = ip::mr_bound_curve(inner(SplittingKind::JOR, 0.5, mat2(1, 1, 1, 1), 1), 5);
  ASSERT_EQ(c.values.size(), 6u);
  EXPECT_EQ(c.values[0], 1.0);
  for (std::size_t k = 1; k < c.values.size(); ++k) EXPECT_EQ(c.values[k], 0.0);
}

TEST(BoundCurves, UnitKappa) {
  const auto p = inner(SplittingKind::Richardson, 1.0, ip::DenseMatrix::Identity(3, 3), 2);
  const auto parts = ip::mr_bound_parts(p, 4);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(parts.kappa.values[k], 0.0);
  const auto cg = ip::cg_bound_curve(p, 4);
  EXPECT_EQ(cg.values[0], 1.0);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(cg.values[k], 0.0);
}

TEST(BoundCurves, CgKappaNine) {
  const auto cg = ip::cg_bound_curve(inner(SplittingKind::Richardson, 1.0, diag({1, 9}), 1), 5);
  EXPECT_EQ(cg.values[0], 1.0);
  EXPECT_NEAR(cg.values[3], 0.25, 1e-14);
  EXPECT_NEAR(cg.values[5], 2.0 / 32.0, 1e-14);
}

TEST(BoundCurves, NonincreasingOnRandomInstances) {
  Rng rng(48);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = ip::testing::random_spsd(rng, 12, 9);
    const auto p = inner(SplittingKind::SSOR, 0.6 + 0.1 * trial, a, 1 + static_cast<std::size_t>(trial) % 3);
    const auto c = ip::mr_bound_curve(p, 30);
    EXPECT_EQ(c.values[0], 1.0);
    for (std::size_t k = 1; k < c.values.size(); ++k) EXPECT_LE(c.values[k], c.values[k - 1]);
    const auto g = ip::cg_bound_curve(p, 30);
    for (std::size_t k = 1; k < g.values.size(); ++k) EXPECT_LE(g.values[k], g.values[k - 1]);
  }
}

TEST(BoundCurves, RefusesDivergentSplitting) {
  EXPECT_THROW(ip::mr_bound_curve(inner(SplittingKind::Richardson, 1.0, diag({1, -1}), 1), 3),
               ip::HypothesisError);
}

TEST(SolutionFormOracle, Examples) {
  auto x = ip::solution_form_oracle(ip::DenseMatrix::Identity(2, 2), ip::DenseMatrix::Identity(2, 2),
                                    ip::Vector{3, -1}, ip::Vector{7, 7});
  EXPECT_LE(ip::testing::max_abs_diff(x, ip::Vector{3, -1}), 1e-15);
  x = ip::solution_form_oracle(diag({1, -1, 0}), ip::DenseMatrix::Identity(3, 3), ip::Vector{1, 1, 0},
                               ip::Vector{0, 0, 0});
  EXPECT_LE(ip::testing::max_abs_diff(x, ip::Vector{1, -1, 0}), 1e-15);
  x = ip::solution_form_oracle(mat2(1, 1, 1, 1), 0.5 * ip::DenseMatrix::Identity(2, 2), ip::Vector{2, 2},
                               ip::Vector{0, 0});
  EXPECT_LE(ip::testing::max_abs_diff(x, ip::Vector{1, 1}), 1e-14);
}

TEST(SolutionFormOracle, NullSpaceComponentOfStartingGuessIsKept) {
  // With C = I the x0 component in N(A) survives unchanged.
  const auto x = ip::solution_form_oracle(diag({2, 0}), ip::DenseMatrix::Identity(2, 2), ip::Vector{4, 0},
                                          ip::Vector{5, 3});
  EXPECT_LE(ip::testing::max_abs_diff(x, ip::Vector{2, 3}), 1e-14);
}

TEST(SolutionFormOracle, Errors) {
  EXPECT_THROW(ip::solution_form_oracle(diag({1, 0}), ip::DenseMatrix::Identity(2, 2), ip::Vector{1, 1},
                                        ip::Vector{0, 0}),
               ip::HypothesisError);
  EXPECT_THROW(ip::solution_form_oracle(diag({1, 1}), diag({1, -1}), ip::Vector{1, 1}, ip::Vector{0, 0}),
               ip::NotDefiniteError);
}
