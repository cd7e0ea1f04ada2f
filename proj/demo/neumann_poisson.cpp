// Singular 2D Neumann Laplacian solved with CG and MINRES preconditioned by
// a few SSOR sweeps. The right-hand side is projected onto R(A) so the
// system is consistent; the solution is unique up to a constant.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "innerprec/innerprec.hpp"

namespace ip = innerprec;

static ip::SparseMatrix neumann_laplacian(std::size_t k) {
  std::vector<ip::Triplet> t;
  auto id = [k](std::size_t i, std::size_t j) { return i * k + j; };
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double deg = 0.0;
      auto link = [&](std::size_t ii, std::size_t jj) {
        t.push_back({id(i, j), id(ii, jj), -1.0});
        deg += 1.0;
      };
      if (i > 0) link(i - 1, j);
      if (i + 1 < k) link(i + 1, j);
      if (j > 0) link(i, j - 1);
      if (j + 1 < k) link(i, j + 1);
      t.push_back({id(i, j), id(i, j), deg});
    }
  }
  return ip::SparseMatrix::from_triplets(k * k, k * k, t);
}

int main(int argc, char** argv) {
  const std::size_t k = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 32;
  const ip::SparseMatrix a = neumann_laplacian(k);
  const std::size_t n = a.rows();

  ip::Vector b(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += b[i] = std::sin(0.37 * static_cast<double>(i));
  mean /= static_cast<double>(n);
  for (double& v : b) v -= mean;

  std::printf("n = %zu\n%-8s %5s %3s %6s  %s\n", n, "method", "omega", "l", "iters", "rel. residual");
  ip::SolverConfig cfg;
  cfg.record_history = false;
  for (double w : {1.0, 1.5}) {
    for (std::size_t ell : {1u, 2u, 4u}) {
      const ip::InnerPreconditioner p(ip::Splitting(ip::SplittingKind::SSOR, w, a), ell);
      const ip::Vector x0(n, 0.0);
      const auto cg = ip::pcg(ip::SparseOperator(a), p, b, x0, cfg);
      const auto mr = ip::pminres(ip::SparseOperator(a), p, b, x0, cfg);
      std::printf("%-8s %5.2f %3zu %6zu  %.2e\n", "cg", w, ell, cg.iterations, cg.final_residual / cg.initial_residual);
      std::printf("%-8s %5.2f %3zu %6zu  %.2e\n", "minres", w, ell, mr.iterations,
                  mr.final_residual / mr.initial_residual);
    }
  }
}
