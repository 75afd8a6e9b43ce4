#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fhc/assembly.hpp"
#include "fhc/errors.hpp"
#include "fhc/mesh.hpp"
#include "fhc/quadrature.hpp"

using namespace fhc;

TEST_CASE("l2q error of the constant against the zero function") {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 0.25, 1.0);
  SparseSymMatrix M = mass_matrix(mesh);
  TimeGrid grid = make_time_grid(1.0, 4);
  Trajectory W = make_trajectory(grid, 1, 4, mesh.n_dofs());
  double e = l2q_error([](double, const double*) { return 1.0; }, 2.0, W, mesh, M);
  CHECK(e == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("l2q error vanishes on an exactly represented function") {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 0.25, 1.0);
  SparseSymMatrix M = mass_matrix(mesh);
  TimeGrid grid = make_time_grid(1.0, 3);
  int n = mesh.n_dofs();
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> c(n);
  for (double& v : c) v = U(rng);
  Trajectory W = make_trajectory(grid, 1, 3, n);
  for (int k = 1; k <= 3; ++k)
    for (int i = 0; i < n; ++i) W.frame(k)[i] = c[i];
  // The time-constant piecewise-linear interpolant of the coefficients.
  auto w = [&](double, const double* x) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double xc = mesh.vertex[mesh.vertex_of_dof[i]][0];
      acc += c[i] * std::max(0.0, 1.0 - std::abs(x[0] - xc) / 0.25);
    }
    return acc;
  };
  std::vector<double> Mc(n);
  M.multiply(c, Mc);
  double nsq = 0.0;
  for (int i = 0; i < n; ++i) nsq += c[i] * Mc[i];
  // Cancellation of O(1) terms bounds the representable zero near 1e-7.
  double e = l2q_error(w, nsq, W, mesh, M, QuadConfig{6, 5, 1.0});
  CHECK(e < 1e-6);
}

TEST_CASE("l2q error matches dense space-time quadrature") {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 0.5, 1.0);
  SparseSymMatrix M = mass_matrix(mesh);
  TimeGrid grid = make_time_grid(1.0, 2);
  int n = mesh.n_dofs();
  Trajectory W = make_trajectory(grid, 1, 2, n);
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& v : W.data) v = U(rng);
  auto w = [](double t, const double* x) { return std::sin(2.0 * t + 0.3) * std::cos(x[0]); };
  double wsq = adaptive_integrate(
      [&](double t) {
        double st = std::sin(2.0 * t + 0.3);
        return st * st *
               adaptive_integrate([](double x) { return std::cos(x) * std::cos(x); }, -1.0,
                                  1.0, 1e-13);
      },
      0.0, 1.0, 1e-12);

  // Dense reference: Gauss in time per step, Gauss per cell in space.
  auto wh = [&](int k, double x) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double xc = mesh.vertex[mesh.vertex_of_dof[i]][0];
      acc += W.frame(k)[i] * std::max(0.0, 1.0 - std::abs(x - xc) / 0.5);
    }
    return acc;
  };
  double ref_sq = 0.0;
  for (int k = 1; k <= 2; ++k) {
    GaussRule tg = gauss_on(10, grid.t(k - 1), grid.t(k));
    for (size_t q = 0; q < tg.x.size(); ++q) {
      double spatial = 0.0;
      for (int c = 0; c < mesh.n_cells(); ++c) {
        double a = mesh.vertex[mesh.cell[c][0]][0], b = mesh.vertex[mesh.cell[c][1]][0];
        GaussRule xg = gauss_on(10, a, b);
        for (size_t p = 0; p < xg.x.size(); ++p) {
          double d = w(tg.x[q], &xg.x[p]) - wh(k, xg.x[p]);
          spatial += xg.w[p] * d * d;
        }
      }
      ref_sq += tg.w[q] * spatial;
    }
  }
  double e = l2q_error(w, wsq, W, mesh, M, QuadConfig{6, 5, 1.0});
  // agreement is limited by the three-point time rule inside l2q_error
  CHECK(e == doctest::Approx(std::sqrt(ref_sq)).epsilon(1e-6));
}

TEST_CASE("discrete distances walk unequal step grids") {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 1.0, 1.0);  // one dof
  SparseSymMatrix M1 = mass_matrix(mesh);
  double m = M1.at(0, 0);
  TimeGrid g2 = make_time_grid(1.0, 2), g3 = make_time_grid(1.0, 3);
  Trajectory A = make_trajectory(g2, 1, 2, 1);
  Trajectory B = make_trajectory(g3, 1, 3, 1);
  A.frame(1)[0] = 1.0;
  A.frame(2)[0] = -1.0;
  B.frame(1)[0] = 0.5;
  B.frame(2)[0] = 0.0;
  B.frame(3)[0] = 2.0;
  // Piecewise intervals: (0,1/3]: 1 vs 0.5; (1/3,1/2]: 1 vs 0; (1/2,2/3]:
  // -1 vs 0; (2/3,1]: -1 vs 2.
  double sq = (1.0 / 3.0) * 0.25 + (1.0 / 6.0) * 1.0 + (1.0 / 6.0) * 1.0 + (1.0 / 3.0) * 9.0;
  CHECK(discrete_l2q_distance(A, B, M1) == doctest::Approx(std::sqrt(m * sq)).epsilon(1e-13));

  ControlField za, zb;
  za.mesh = &mesh;
  za.grid = g2;
  za.value = {1.0, 1.0, -1.0, -1.0};  // two cells, two steps
  zb.mesh = &mesh;
  zb.grid = g3;
  zb.value = {0.5, 0.5, 0.0, 0.0, 2.0, 2.0};
  CHECK(discrete_l2q_distance(za, zb) == doctest::Approx(std::sqrt(2.0 * sq)).epsilon(1e-13));
}

TEST_CASE("nodal transfer is exact on nested meshes") {
  Mesh coarse = build_mesh(Domain::interval(-1.0, 1.0), 0.5, 1.0);
  Mesh fine = build_mesh(Domain::interval(-1.0, 1.0), 0.25, 1.0);
  std::vector<double> u{0.0, 1.0, 0.0};  // hat at the middle dof
  std::vector<double> v = transfer_nodal(coarse, u, fine);
  REQUIRE((int)v.size() == fine.n_dofs());
  for (int d = 0; d < fine.n_dofs(); ++d) {
    double x = fine.vertex[fine.vertex_of_dof[d]][0];
    double expect = std::max(0.0, 1.0 - std::abs(x) / 0.5);
    CHECK(v[d] == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("control transfer reads containing coarse cells") {
  Mesh coarse = build_mesh(Domain::interval(-1.0, 1.0), 0.5, 1.0);
  Mesh fine = build_mesh(Domain::interval(-1.0, 1.0), 0.25, 1.0);
  TimeGrid grid = make_time_grid(1.0, 2);
  ControlField zc = make_control(coarse, grid);
  for (int k = 1; k <= 2; ++k)
    for (int c = 0; c < coarse.n_cells(); ++c) zc.at(k, c) = 10.0 * k + c;
  ControlField zf = transfer_control(zc, fine);
  for (int k = 1; k <= 2; ++k)
    for (int c = 0; c < fine.n_cells(); ++c) {
      double mid = 0.5 * (fine.vertex[fine.cell[c][0]][0] + fine.vertex[fine.cell[c][1]][0]);
      int cc = (int)std::floor((mid + 1.0) / 0.5);
      CHECK(zf.at(k, c) == doctest::Approx(10.0 * k + cc).epsilon(1e-13));
    }
}

TEST_CASE("eoc computes pairwise slopes") {
  auto r = eoc({1.0, 0.25, 0.0625}, {1.0, 0.5, 0.25});
  REQUIRE(r.size() == 2);
  CHECK(r[0].rate == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r[1].rate == doctest::Approx(2.0).epsilon(1e-13));
  auto flat = eoc({0.3, 0.3}, {1.0, 0.5});
  CHECK(flat[0].rate == doctest::Approx(0.0).scale(1.0));
  auto half = eoc({1.0, std::sqrt(0.5)}, {1.0, 0.5});
  CHECK(half[0].rate == doctest::Approx(0.5).epsilon(1e-12));
  auto zero = eoc({1.0, 0.0}, {1.0, 0.5});
  CHECK(zero[0].below_tolerance);
  CHECK_THROWS_AS((void)eoc({1.0, 0.5}, {0.5, 1.0}), std::exception);
}
