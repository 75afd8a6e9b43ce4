#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fhc/mesh.hpp"

using namespace fhc;

namespace {

double signed_area(const Mesh& m, int c) {
  const auto& a = m.vertex[m.cell[c][0]];
  const auto& b = m.vertex[m.cell[c][1]];
  const auto& d = m.vertex[m.cell[c][2]];
  return 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]));
}

}  // namespace

TEST_CASE("uniform interval mesh hits the requested vertices") {
  Mesh m = build_mesh(Domain::interval(-1.0, 1.0), 0.5, 1.0);
  REQUIRE(m.n_vertices() == 5);
  REQUIRE(m.n_cells() == 4);
  for (int i = 0; i < 5; ++i) CHECK(m.vertex[i][0] == doctest::Approx(-1.0 + 0.5 * i));
  MeshStats st = mesh_stats(m);
  CHECK(st.h_max == doctest::Approx(0.5));
  CHECK(st.h_min == doctest::Approx(0.5));
  CHECK(st.n_interior == 3);
  CHECK(st.measure_sum == doctest::Approx(2.0).epsilon(1e-14));
  // 1D orientation: left vertex below right vertex.
  for (int c = 0; c < m.n_cells(); ++c)
    CHECK(m.vertex[m.cell[c][0]][0] < m.vertex[m.cell[c][1]][0]);
}

TEST_CASE("graded interval mesh shrinks boundary cells like h^kappa") {
  double h = 0.25;
  Mesh m = build_mesh(Domain::interval(-1.0, 1.0), h, 2.0);
  MeshStats st = mesh_stats(m);
  CHECK(st.h_min >= 0.5 * h * h);
  CHECK(st.h_min <= 2.0 * h * h);
  CHECK(st.h_max > 4.0 * st.h_min);  // interior cells grow toward the center
  CHECK(st.sigma_max <= 10.0);
  CHECK(st.measure_sum == doctest::Approx(2.0).epsilon(1e-12));
  // Symmetric grading: first and last cells have equal length.
  double first = m.vertex[1][0] - m.vertex[0][0];
  double last = m.vertex[m.n_vertices() - 1][0] - m.vertex[m.n_vertices() - 2][0];
  CHECK(first == doctest::Approx(last).epsilon(1e-12));
}

TEST_CASE("disc mesh is oriented, shape regular, and nearly fills the disc") {
  Mesh m = build_mesh(Domain::disc(1.0), 0.5, 1.0);
  REQUIRE(m.dim == 2);
  MeshStats st = mesh_stats(m);
  CHECK(st.sigma_max <= 4.0);
  CHECK(st.measure_sum > 0.95 * M_PI);
  CHECK(st.measure_sum < M_PI);  // inscribed polygon
  double area = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    double a = signed_area(m, c);
    CHECK(a > 0.0);
    area += a;
  }
  CHECK(area == doctest::Approx(st.measure_sum).epsilon(1e-12));
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.on_boundary[v]) {
      double r = std::hypot(m.vertex[v][0], m.vertex[v][1]);
      CHECK(std::abs(r - 1.0) < 1e-10);
    }
  CHECK(st.n_interior == m.n_dofs());
}

TEST_CASE("refinement at least doubles cells and halves h_max within 1.5x") {
  for (const Domain& dom : {Domain::interval(-1.0, 1.0), Domain::disc(1.0)}) {
    Mesh coarse = build_mesh(dom, 0.5, 1.0);
    Mesh fine = build_mesh(dom, 0.25, 1.0);
    MeshStats sc = mesh_stats(coarse), sf = mesh_stats(fine);
    CHECK(sf.n_cells >= 2 * sc.n_cells);
    CHECK(sc.h_max / sf.h_max >= 2.0 / 1.5);
  }
}

TEST_CASE("graded 2D cell count grows like h^-2 log(1/h)") {
  double lo = 1e300, hi = 0.0;
  for (double h : {0.25, 0.125, 0.0625}) {
    Mesh m = build_mesh(Domain::disc(1.0), h, 2.0);
    double ratio = m.n_cells() / (std::pow(h, -2.0) * std::abs(std::log(h)));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo <= 4.0);
}

TEST_CASE("mesh_stats records the equilateral shape constant") {
  Mesh m;
  m.dim = 2;
  m.vertex = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
  m.cell = {{0, 1, 2}};
  m.on_boundary = {1, 1, 1};
  m.dof_of_vertex = {-1, -1, -1};
  MeshStats st = mesh_stats(m);
  // diameter / inscribed-ball diameter = 1 / (1/sqrt(3)) = sqrt(3)
  CHECK(st.sigma_max == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(st.n_interior == 0);
}

TEST_CASE("degenerate build requests are rejected") {
  CHECK_THROWS_AS((void)build_mesh(Domain::interval(-1.0, 1.0), 0.0, 1.0), std::exception);
  CHECK_THROWS_AS((void)build_mesh(Domain::interval(-1.0, 1.0), -0.5, 1.0), std::exception);
  CHECK_THROWS_AS((void)build_mesh(Domain::interval(-1.0, 1.0), 0.5, 0.5), std::exception);
  CHECK_THROWS_AS((void)build_mesh(Domain::interval(-1.0, 1.0), 0.5, 2.5), std::exception);
  CHECK_THROWS_AS((void)build_mesh(Domain::interval(1.0, 1.0), 0.5, 1.0), std::exception);
  CHECK_THROWS_AS((void)build_mesh(Domain::disc(0.0), 0.5, 1.0), std::exception);
}

TEST_CASE("serialization round-trips bit-exactly") {
  for (double kappa : {1.0, 2.0}) {
    for (const Domain& dom : {Domain::interval(-1.0, 1.0), Domain::disc(1.0)}) {
      Mesh m = build_mesh(dom, 0.3, kappa);
      std::string text = serialize_mesh(m);
      Mesh back = parse_mesh(text);
      CHECK(serialize_mesh(back) == text);
      REQUIRE(back.n_vertices() == m.n_vertices());
      REQUIRE(back.n_cells() == m.n_cells());
      CHECK(back.n_dofs() == m.n_dofs());
      for (int v = 0; v < m.n_vertices(); ++v) {
        CHECK(back.vertex[v][0] == m.vertex[v][0]);
        CHECK(back.vertex[v][1] == m.vertex[v][1]);
        CHECK(back.on_boundary[v] == m.on_boundary[v]);
      }
    }
  }
}
