#pragma once

#include <vector>

#include "fhc/mesh.hpp"
#include "fhc/problem.hpp"
#include "fhc/timestepping.hpp"

namespace fhc {

// Piecewise-constant control: one scalar per cell per time step, steps 1..K.
struct ControlField {
  const Mesh* mesh = nullptr;
  TimeGrid grid;
  std::vector<double> value;  // (k-1) * n_cells + cell

  int n_cells() const { return mesh ? mesh->n_cells() : 0; }
  double& at(int k, int c) { return value[(size_t)(k - 1) * n_cells() + c]; }
  double at(int k, int c) const { return value[(size_t)(k - 1) * n_cells() + c]; }
  void check() const;
};

ControlField make_control(const Mesh& mesh, const TimeGrid& grid, double init = 0.0);

double box_project(double v, double a, double b);
ControlField box_project(const ControlField& z, double a, double b);

// L2(Q)-orthogonal projection onto piecewise constants: per cell and step,
// (1/(|K| tau)) int_{I_k} int_K w. Time integral by 3-point Gauss.
ControlField project_control(const SpaceTimeFn& w, const Mesh& mesh, const TimeGrid& grid,
                             const QuadConfig& qc = {});

// Projection of a nodal trajectory; the cell average of an affine function
// is the mean of its vertex values (boundary vertices contribute zero).
// Step k of the result reads frame k + frame_offset of the input, so an
// adjoint indexed 0..K pairs with controls via frame_offset = -1.
ControlField project_control(const Trajectory& nodal, const Mesh& mesh, int frame_offset = 0);

// Nodal load of one control step: (B z)_i = sum_{cells K owning i} z_K |K|/(d+1).
std::vector<double> control_load(const ControlField& z, int step);

// Weighted inner product sum_k tau sum_K |K| y z and the induced norm.
double control_inner(const ControlField& y, const ControlField& z);
double control_l2q_norm(const ControlField& z);

// CSV "k,cell,value".
std::string dump_control(const ControlField& z);

}  // namespace fhc
