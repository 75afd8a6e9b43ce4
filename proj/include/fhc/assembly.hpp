#pragma once

#include <string>
#include <vector>

#include "fhc/kernel.hpp"
#include "fhc/mesh.hpp"
#include "fhc/problem.hpp"
#include "fhc/sparse.hpp"

namespace fhc {

struct QuadConfig {
  int gauss_order_regular = 5;    // tensor Gauss points per axis on separated pairs
  int gauss_order_singular = 5;   // points per axis inside the regularizing transforms
  double near_field_threshold = 1.0;  // refine while gap < threshold * element size
  void validate(int dim) const;
};

// Galerkin matrix of the nonlocal bilinear form on interior hat functions:
// pairwise double integrals over the domain plus the complement weight term.
SparseSymMatrix fractional_stiffness(const Mesh& mesh, const KernelParams& kp,
                                     const QuadConfig& qc = {});

// Exact piecewise-linear mass matrix; interior dofs by default.
SparseSymMatrix mass_matrix(const Mesh& mesh, bool include_boundary = false);

std::vector<double> load_vector(const Mesh& mesh, const SpatialFn& g, const QuadConfig& qc = {});

// Coordinate-format text dump, "i j value" per line, 0-based, sorted.
std::string dump_coordinate(const SparseSymMatrix& A);

}  // namespace fhc
