#include <gtest/gtest.h>

#include <array>

#include "innerprec/innerprec.hpp"
#include "test_support.hpp"

namespace ip = innerprec;
using ip::SplittingKind;
using ip::testing::Rng;

namespace {

ip::SparseMatrix sparse(const ip::DenseMatrix& d) { return ip::to_sparse(d); }

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

constexpr std::array kDirectKinds{SplittingKind::Richardson, SplittingKind::JOR, SplittingKind::SSOR};

} // namespace

TEST(ApplyMInv, Richardson) {
  const ip::Splitting s(SplittingKind::Richardson, 1.0, sparse(mat2(2, 1, 1, 3)));
  EXPECT_EQ(ip::apply_M_inv(s, ip::Vector{3, 4}), (ip::Vector{3, 4}));
  const ip::Splitting s2(SplittingKind::Richardson, 0.25, sparse(mat2(2, 1, 1, 3)));
  EXPECT_EQ(ip::apply_M_inv(s2, ip::Vector{4, 8}), (ip::Vector{1, 2}));
}

TEST(ApplyMInv, JorOnSingularMatrix) {
  const ip::Splitting s(SplittingKind::JOR, 0.5, sparse(mat2(1, 1, 1, 1)));
  EXPECT_EQ(ip::apply_M_inv(s, ip::Vector{2, 2}), (ip::Vector{1, 1}));
}

TEST(ApplyMInv, SsorMatchesDenseM) {
  const ip::DenseMatrix a = mat2(2, -1, -1, 2);
  const ip::Splitting s(SplittingKind::SSOR, 1.0, sparse(a));
  const ip::DenseMatrix m = ip::testing::oracle_M(SplittingKind::SSOR, 1.0, a);
  const ip::Vector r{0.3, -1.7};
  const ip::DenseVector want = Eigen::MatrixXd(m).partialPivLu().solve(ip::to_eigen(r));
  EXPECT_LE(ip::testing::max_abs_diff(ip::apply_M_inv(s, r), ip::to_std(want)), 1e-12);
}

TEST(ApplyMInv, SsorRandomOmegas) {
  Rng rng(31);
  for (double w : {0.3, 1.0, 1.7, -0.5, 2.6}) {
    const auto a = ip::testing::random_symmetric_positive_diag(rng, 8);
    const ip::Splitting s(SplittingKind::SSOR, w, sparse(a));
    const ip::DenseMatrix m = ip::testing::oracle_M(SplittingKind::SSOR, w, a);
    const auto r = ip::testing::random_vector(rng, 8);
    const ip::DenseVector want = Eigen::MatrixXd(m).partialPivLu().solve(ip::to_eigen(r));
    EXPECT_LE(ip::testing::rel_diff(ip::apply_M_inv(s, r), ip::to_std(want)), 1e-11) << "omega " << w;
    EXPECT_LE(ip::max_abs(ip::splitting_matrix_dense(s) - m), 1e-12 * ip::max_abs(m));
  }
}

TEST(ApplyInner, IdentityIsExact) {
  const ip::Splitting s(SplittingKind::Richardson, 1.0, ip::SparseMatrix::identity(3));
  for (std::size_t ell : {1u, 2u, 7u}) {
    EXPECT_EQ(ip::apply_inner(ip::InnerPreconditioner(s, ell), ip::Vector{1, -2, 3}), (ip::Vector{1, -2, 3}));
  }
}

TEST(ApplyInner, DivergentInnerIterationOneStep) {
  const ip::Splitting s(SplittingKind::Richardson, 1.0, sparse(diag({1, -1})));
  EXPECT_EQ(ip::apply_inner(ip::InnerPreconditioner(s, 1), ip::Vector{1, 1}), (ip::Vector{1, 1}));
  const auto d = ip::materialize_dense(ip::InnerPreconditioner(s, 1));
  EXPECT_EQ(d.H, diag({0, 2}));
}

TEST(ApplyInner, RandomSsorMatchesDenseSeries) {
  Rng rng(32);
  const auto a = ip::testing::random_symmetric_positive_diag(rng, 6);
  const ip::InnerPreconditioner p(ip::Splitting(SplittingKind::SSOR, 1.2, sparse(a)), 3);
  const auto o = ip::testing::oracle_inner(SplittingKind::SSOR, 1.2, a, 3);
  const auto r = ip::testing::random_vector(rng, 6);
  const ip::DenseVector want = o.C * ip::to_eigen(r);
  EXPECT_LE(ip::testing::max_abs_diff(ip::apply_inner(p, r), ip::to_std(want)), 1e-10);
}

TEST(ApplyInner, NegatedFlipsSign) {
  const ip::InnerPreconditioner p(ip::Splitting(SplittingKind::Richardson, -1.0, ip::SparseMatrix::identity(2)), 1);
  const auto n = p.negated();
  ip::Vector z(2);
  n.apply(ip::Vector{1, 2}, z);
  EXPECT_EQ(z, (ip::Vector{1, 2}));
  EXPECT_EQ(ip::apply_inner(n, ip::Vector{1, 2}), (ip::Vector{-1, -2}));
}

TEST(MaterializeDense, IdentityAndSeries) {
  auto d = ip::materialize_dense(ip::InnerPreconditioner(
      ip::Splitting(SplittingKind::Richardson, 1.0, ip::SparseMatrix::identity(3)), 5));
  EXPECT_EQ(d.C, ip::DenseMatrix::Identity(3, 3));
  EXPECT_EQ(d.H, ip::DenseMatrix::Zero(3, 3));
  d = ip::materialize_dense(
      ip::InnerPreconditioner(ip::Splitting(SplittingKind::Richardson, 1.0, sparse(diag({1, -1}))), 2));
  EXPECT_EQ(d.H, diag({0, 2}));
  EXPECT_EQ(d.C, diag({1, 3}));
}

TEST(MaterializeDense, SizeCap) {
  const ip::InnerPreconditioner p(
      ip::Splitting(SplittingKind::Richardson, 1.0, ip::SparseMatrix::identity(2001)), 1);
  EXPECT_THROW(ip::materialize_dense(p), ip::SizeCapError);
}

// Symmetry of C, C A = I - H^l, and agreement with the dense oracle over
// random symmetric matrices, all direct kinds, a spread of omegas and l.
TEST(SplittingProperties, DenseIdentitiesOnRandomInstances) {
  Rng rng(33);
  std::uniform_int_distribution<std::size_t> dim(2, 20);
  std::uniform_real_distribution<double> om(0.2, 1.9);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = dim(rng);
    const auto a = ip::testing::random_symmetric_positive_diag(rng, n);
    const auto kind = kDirectKinds[static_cast<std::size_t>(trial) % 3];
    const double w = kind == SplittingKind::Richardson ? om(rng) / 4.0 : om(rng);
    const std::size_t ell = 1 + static_cast<std::size_t>(trial) % 5;
    const ip::InnerPreconditioner p(ip::Splitting(kind, w, sparse(a)), ell);
    const auto d = ip::materialize_dense(p);
    const auto o = ip::testing::oracle_inner(kind, w, a, ell);
    const double scale = std::max(1.0, ip::max_abs(o.C));
    EXPECT_LE(ip::max_abs(d.C - o.C), 1e-9 * scale) << "trial " << trial;
    EXPECT_LE(ip::max_abs(d.H - o.H), 1e-9 * std::max(1.0, ip::max_abs(o.H))) << "trial " << trial;
    EXPECT_LE(ip::asymmetry(d.C), 1e-10 * scale) << "trial " << trial;

    ip::DenseMatrix hl = ip::DenseMatrix::Identity(a.rows(), a.rows());
    for (std::size_t i = 0; i < ell; ++i) hl = hl * d.H;
    const ip::DenseMatrix lhs = d.C * a;
    const ip::DenseMatrix rhs = ip::DenseMatrix::Identity(a.rows(), a.rows()) - hl;
    EXPECT_LE(ip::max_abs(lhs - rhs), 1e-10 * std::max(1.0, ip::max_abs(hl))) << "trial " << trial;
  }
}

TEST(SplittingProperties, EvenEllFactorization) {
  Rng rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial) % 10;
    const auto a = ip::testing::random_symmetric_positive_diag(rng, n);
    const auto kind = kDirectKinds[static_cast<std::size_t>(trial) % 3];
    const double w = kind == SplittingKind::Richardson ? 0.2 : 0.9;
    const std::size_t ell = trial % 2 == 0 ? 2 : 4;
    const ip::InnerPreconditioner p(ip::Splitting(kind, w, sparse(a)), ell);
    const auto d = ip::materialize_dense(p);
    const ip::DenseMatrix m = ip::splitting_matrix_dense(p.splitting());
    const ip::DenseMatrix mpn = 2.0 * m - a;
    const auto ni = a.rows();
    ip::DenseMatrix series = ip::DenseMatrix::Zero(ni, ni);
    ip::DenseMatrix h2 = ip::DenseMatrix::Identity(ni, ni);
    for (std::size_t i = 0; i < ell; i += 2) {
      series += h2;
      h2 = h2 * d.H * d.H;
    }
    const ip::DenseMatrix lhs = m * d.C * m;
    const ip::DenseMatrix rhs = mpn * series;
    EXPECT_LE(ip::max_abs(lhs - rhs), 1e-8 * std::max(1.0, ip::max_abs(rhs))) << "trial " << trial;
  }
}

TEST(SplittingProperties, SpectrumOfHIsRealForDefiniteM) {
  Rng rng(35);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = ip::testing::random_symmetric_positive_diag(rng, 12);
    const auto kind = kDirectKinds[static_cast<std::size_t>(trial) % 3];
    const double w = trial % 4 == 3 ? -0.7 : 0.8;
    const ip::Splitting s(kind, w, sparse(a));
    const auto d = ip::materialize_dense(ip::InnerPreconditioner(s, 1));
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(d.H), false);
    EXPECT_LE(es.eigenvalues().imag().cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
  }
}

TEST(SplittingProperties, NormalSidesMatchExplicitGram) {
  Rng rng(36);
  const std::array ne{SplittingKind::RichardsonNE, SplittingKind::CimminoNE, SplittingKind::NESSOR};
  const std::array direct{SplittingKind::Richardson, SplittingKind::JOR, SplittingKind::SSOR};
  std::uniform_int_distribution<std::size_t> dim(2, 30);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = dim(rng), n = dim(rng);
    const auto ad = ip::testing::random_dense(rng, m, n);
    const auto a = sparse(ad);
    const std::size_t k = static_cast<std::size_t>(trial) % 3;
    const double w = k == 0 ? 1.0 / static_cast<double>(m + n) : 1.1;
    const std::size_t ell = 1 + static_cast<std::size_t>(trial) % 4;
    for (ip::Side side : {ip::Side::NormalLeft, ip::Side::NormalRight}) {
      const ip::InnerPreconditioner implicit(ip::Splitting(ne[k], w, a, side), ell);
      const ip::SparseMatrix gram = side == ip::Side::NormalLeft ? ip::gram_left(a) : ip::gram_right(a);
      const ip::InnerPreconditioner explicit_(ip::Splitting(direct[k], w, gram), ell);
      ASSERT_EQ(implicit.dimension(), explicit_.dimension());
      const auto r = ip::testing::random_vector(rng, implicit.dimension());
      const auto zi = ip::apply_inner(implicit, r);
      const auto ze = ip::apply_inner(explicit_, r);
      double scale = 1.0;
      for (double v : ze) scale = std::max(scale, std::abs(v));
      EXPECT_LE(ip::testing::max_abs_diff(zi, ze), 1e-10 * scale)
          << "trial " << trial << " side " << ip::to_string(side);
    }
  }
}

TEST(Splitting, ConstructionErrors) {
  const auto a = ip::SparseMatrix::identity(2);
  EXPECT_THROW(ip::Splitting(SplittingKind::JOR, 0.0, a), ip::SplittingError);
  EXPECT_THROW(ip::Splitting(SplittingKind::SSOR, 2.0, a), ip::SplittingError);
  EXPECT_THROW(ip::Splitting(SplittingKind::NESSOR, 1.0, a), ip::SplittingError);
  EXPECT_THROW(ip::Splitting(SplittingKind::SSOR, 1.0, a, ip::Side::NormalLeft), ip::SplittingError);
  EXPECT_THROW(ip::Splitting(SplittingKind::JOR, 1.0, sparse(mat2(1, 2, 0, 1))), ip::NotSymmetricError);
  EXPECT_THROW(ip::Splitting(SplittingKind::JOR, 1.0, sparse(mat2(0, 1, 1, 1))), ip::SplittingError);
  std::vector<double> rect{1, 0, 2, 0};
  const auto zero_col = ip::SparseMatrix::from_row_major(2, 2, rect);
  EXPECT_THROW(ip::Splitting(SplittingKind::CimminoNE, 1.0, zero_col, ip::Side::NormalLeft), ip::SplittingError);
  EXPECT_NO_THROW(ip::Splitting(SplittingKind::CimminoNE, 1.0, zero_col, ip::Side::NormalRight));
  EXPECT_NO_THROW(ip::Splitting(SplittingKind::RichardsonNE, 1.0, zero_col, ip::Side::NormalLeft));
  EXPECT_THROW(ip::InnerPreconditioner(ip::Splitting(SplittingKind::JOR, 1.0, a), 0), ip::SplittingError);
}

TEST(Splitting, Names) {
  for (auto k : {SplittingKind::Richardson, SplittingKind::JOR, SplittingKind::SSOR, SplittingKind::RichardsonNE,
                 SplittingKind::CimminoNE, SplittingKind::NESSOR}) {
    EXPECT_EQ(ip::parse_splitting_kind(ip::to_string(k)), k);
  }
  EXPECT_FALSE(ip::parse_splitting_kind("gauss-seidel").has_value());
}
