#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fhc {

enum class DomainKind { interval, disc, unknown };

// Domain descriptor. Interval (xl,xr) in 1D; disc of radius `radius`
// centered at the origin in 2D.
struct Domain {
  DomainKind kind = DomainKind::unknown;
  double xl = 0.0, xr = 0.0;
  double radius = 0.0;

  static Domain interval(double xl, double xr);
  static Domain disc(double radius);
  double measure() const;  // length / area (disc: pi R^2)
};

// Simplicial mesh with homogeneous-Dirichlet boundary flags. Discrete
// functions carry one coefficient per interior vertex and are extended by
// zero outside the domain. Immutable after construction.
struct Mesh {
  int dim = 0;
  Domain domain;
  double kappa = 1.0;
  double target_h = 0.0;

  std::vector<std::array<double, 2>> vertex;  // 1D uses [0] only
  std::vector<std::array<int, 3>> cell;       // 1D: {v0,v1,-1}, v0 < v1
  std::vector<std::uint8_t> on_boundary;      // per vertex
  std::vector<int> dof_of_vertex;             // -1 on boundary
  std::vector<int> vertex_of_dof;

  int n_cells() const { return (int)cell.size(); }
  int n_vertices() const { return (int)vertex.size(); }
  int n_dofs() const { return (int)vertex_of_dof.size(); }

  double cell_measure(int c) const;   // length (1D) or area (2D)
  double cell_diameter(int c) const;
};

struct MeshStats {
  int n_vertices = 0;
  int n_cells = 0;
  int n_interior = 0;
  double h_max = 0.0;
  double h_min = 0.0;
  double sigma_max = 0.0;  // max over cells of diameter / inscribed-ball diameter
  double measure_sum = 0.0;
};

// Builds a mesh of `domain` with parameter target_h and grading kappa in
// [1,2]. kappa=1 is (quasi-)uniform; kappa>1 grades cell sizes toward the
// boundary like h^kappa. Rejects target_h <= 0, kappa outside [1,2],
// degenerate domains, and generated meshes with shape parameter > 10.
Mesh build_mesh(const Domain& domain, double target_h, double kappa);

MeshStats mesh_stats(const Mesh& mesh);

// Plain-text serialization: "DIM n", "VERTICES m" + coordinate lines,
// "CELLS c" + 0-based index lines, "BOUNDARY" + flagged vertex indices.
// Round-trips bit-exactly. The domain descriptor is not part of the format;
// parse_mesh leaves it unknown.
std::string serialize_mesh(const Mesh& mesh);
Mesh parse_mesh(const std::string& text);

}  // namespace fhc
