#pragma once

#include <vector>

#include "fhc/control.hpp"
#include "fhc/timestepping.hpp"

namespace fhc {

// L2(Q) distance between a space-time function with known squared norm and
// a discrete function that is piecewise constant in time. The discrete
// square and cross terms are exact up to the spatial rule; the cross term
// integrates each step interval with 3-point Gauss. Roundoff-negative
// squared results clamp to zero.
double l2q_error(const SpaceTimeFn& w, double w_norm_sq, const Trajectory& W, const Mesh& mesh,
                 const SparseSymMatrix& M, const QuadConfig& qc = {});
double l2q_error(const SpaceTimeFn& w, double w_norm_sq, const ControlField& W,
                 const QuadConfig& qc = {});

// Exact L2(Q) distance between piecewise-constant-in-time coefficient
// families on the same mesh; the step grids may differ (union-interval
// walk). G weighs the spatial inner product (mass or stiffness matrix).
double discrete_l2q_distance(const Trajectory& A, const Trajectory& B, const SparseSymMatrix& G);
double discrete_l2q_distance(const ControlField& A, const ControlField& B);

// Coarse-to-fine transfer: evaluate the coarse P1 function at fine vertices
// (affine extension of the nearest cell outside the coarse hull).
std::vector<double> transfer_nodal(const Mesh& coarse, const std::vector<double>& u,
                                   const Mesh& fine);
Trajectory transfer_trajectory(const Mesh& coarse, const Trajectory& U, const Mesh& fine);
// Coarse control read on fine cells through containing-cell (centroid) lookup.
ControlField transfer_control(const ControlField& zc, const Mesh& fine);

struct EocEntry {
  double rate = 0.0;
  bool below_tolerance = false;  // an error vanished; no meaningful rate
};

// Pairwise log-ratio slopes; hs must be strictly decreasing and errors
// nonnegative. Result has size errors.size() - 1.
std::vector<EocEntry> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

}  // namespace fhc
