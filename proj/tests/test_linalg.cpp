#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fhc/assembly.hpp"
#include "fhc/cg.hpp"
#include "fhc/kernel.hpp"
#include "fhc/mesh.hpp"
#include "fhc/sparse.hpp"

using namespace fhc;

namespace {

SparseSymMatrix dense_to_sparse(const std::vector<std::vector<double>>& a) {
  int n = (int)a.size();
  SparseBuilder b(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (a[i][j] != 0.0 || i == j) {
        b.add(i, j, a[i][j]);
        if (j > i) b.add(j, i, a[i][j]);
      }
  return b.finalize();
}

}  // namespace

TEST_CASE("cg solves the 2x2 system exactly") {
  SparseSymMatrix A = dense_to_sparse({{4.0, 1.0}, {1.0, 3.0}});
  auto [x, rep] = cg_solve(A, {1.0, 2.0});
  REQUIRE(rep.converged);
  CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("cg on the identity converges in one iteration") {
  SparseSymMatrix I = dense_to_sparse({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  auto [x, rep] = cg_solve(I, {3.0, -2.0, 0.5});
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[2] == doctest::Approx(0.5));
}

TEST_CASE("cg returns zero for a zero right-hand side without iterating") {
  SparseSymMatrix A = dense_to_sparse({{4.0, 1.0}, {1.0, 3.0}});
  auto [x, rep] = cg_solve(A, {0.0, 0.0});
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
}

TEST_CASE("cg finishes within the dimension on a 40x40 SPD matrix") {
  const int n = 40;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a[i][j] = a[j][i] = U(rng);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += std::abs(a[i][j]);
    a[i][i] = off + 1.0;  // strict diagonal dominance makes it SPD
  }
  SparseSymMatrix A = dense_to_sparse(a);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = U(rng);
  auto [x, rep] = cg_solve(A, b, 1e-12, n, Precond::none);
  CHECK(rep.converged);
  CHECK(rep.iterations <= n);
  std::vector<double> r(n);
  A.multiply(x, r);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (r[i] - b[i]) * (r[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) <= 1e-11);
}

TEST_CASE("jacobi preconditioning does not hurt on the stepping system") {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 2.0 / 32, 1.0);
  SparseSymMatrix K = fractional_stiffness(mesh, make_kernel_params(1, 0.5));
  SparseSymMatrix M = mass_matrix(mesh);
  double tau = 0.05;
  SparseSymMatrix A = merged_add(M, 1.0, K, tau);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> b(A.n);
  for (double& v : b) v = U(rng);
  auto [xn, rn] = cg_solve(A, b, 1e-10, 10000, Precond::none);
  auto [xj, rj] = cg_solve(A, b, 1e-10, 10000, Precond::jacobi);
  REQUIRE(rn.converged);
  REQUIRE(rj.converged);
  CHECK(rj.iterations <= (int)std::ceil(1.1 * rn.iterations) + 1);
}

TEST_CASE("cg reports non-convergence and rejects NaN data") {
  SparseSymMatrix A = dense_to_sparse({{1.0, 0.999}, {0.999, 1.0}});
  // b mixes both eigendirections, so one Krylov step cannot be exact
  auto [x, rep] = cg_solve(A, {1.0, 0.0}, 1e-16, 1);
  CHECK(!rep.converged);
  CHECK(std::isfinite(x[0]));
  CHECK_THROWS_AS((void)cg_solve(A, {std::numeric_limits<double>::quiet_NaN(), 1.0}),
                  std::exception);
}

TEST_CASE("sparse invariants: sorted rows, symmetric pattern, stored diagonal") {
  SparseBuilder b(3);
  b.add(0, 2, 1.5);
  b.add(2, 0, 1.5);
  b.add(0, 2, 0.5);  // duplicate contributions accumulate
  b.add(2, 0, 0.5);
  b.add(1, 1, 2.0);
  SparseSymMatrix A = b.finalize();
  A.check_invariants();
  CHECK(A.at(0, 2) == doctest::Approx(2.0));
  CHECK(A.at(2, 0) == doctest::Approx(2.0));
  CHECK(A.at(0, 0) == 0.0);  // inserted diagonal, numerically zero
  CHECK(A.at(1, 1) == doctest::Approx(2.0));
  CHECK(A.at(1, 2) == 0.0);  // outside the pattern
  for (int i = 0; i < A.n; ++i)
    for (int k = A.row_ptr[i] + 1; k < A.row_ptr[i + 1]; ++k)
      CHECK(A.col_idx[k - 1] < A.col_idx[k]);
}

TEST_CASE("merged_add combines distinct patterns") {
  SparseBuilder b1(2), b2(2);
  b1.add(0, 0, 2.0);
  b1.add(1, 1, 2.0);
  b2.add(0, 1, 1.0);
  b2.add(1, 0, 1.0);
  b2.add(0, 0, 1.0);
  b2.add(1, 1, 1.0);
  SparseSymMatrix A = merged_add(b1.finalize(), 2.0, b2.finalize(), -1.0);
  A.check_invariants();
  CHECK(A.at(0, 0) == doctest::Approx(3.0));
  CHECK(A.at(0, 1) == doctest::Approx(-1.0));
  CHECK(A.at(1, 1) == doctest::Approx(3.0));
}

TEST_CASE("scaled and axpby preserve the pattern") {
  SparseBuilder b(2);
  b.add(0, 0, 4.0);
  b.add(0, 1, 1.0);
  b.add(1, 0, 1.0);
  b.add(1, 1, 3.0);
  SparseSymMatrix A = b.finalize();
  SparseSymMatrix B = A.scaled(0.5);
  CHECK(B.at(0, 1) == doctest::Approx(0.5));
  SparseSymMatrix C = A.axpby(1.0, B, 2.0);
  CHECK(C.at(0, 0) == doctest::Approx(8.0));
  CHECK(C.at(1, 1) == doctest::Approx(6.0));
  std::vector<double> y;
  std::vector<double> x{1.0, -1.0};
  A.multiply(x, y);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[1] == doctest::Approx(-2.0));
  auto d = A.diagonal();
  CHECK(d[0] == doctest::Approx(4.0));
  CHECK(d[1] == doctest::Approx(3.0));
}
