#pragma once

#include <string>
#include <vector>

#include "fhc/assembly.hpp"
#include "fhc/cg.hpp"
#include "fhc/mesh.hpp"
#include "fhc/problem.hpp"
#include "fhc/sparse.hpp"

namespace fhc {

struct ControlField;

// Uniform partition of (0, T]. Stores T and the step count, so tau * K = T
// holds by construction.
struct TimeGrid {
  double T = 1.0;
  int K_steps = 1;
  double tau() const { return T / K_steps; }
  double t(int k) const { return k == K_steps ? T : k * tau(); }
};

TimeGrid make_time_grid(double T, int K_steps);
// Step count coupled to the mesh parameter: K = ceil(T / h^gamma).
TimeGrid coupled_time_grid(double T, double h, double gamma);

// Family of coefficient vectors indexed first..first+frames-1 on a common
// time grid. States and adjoints use 0..K; per-step data (loads, targets,
// controls in nodal form) use 1..K.
struct Trajectory {
  TimeGrid grid;
  int first = 0;
  int n = 0;
  std::vector<double> data;

  int frames() const { return n > 0 ? (int)(data.size() / n) : 0; }
  int last() const { return first + frames() - 1; }
  double* frame(int k);
  const double* frame(int k) const;
  void check() const;  // shape and finiteness
};

Trajectory make_trajectory(const TimeGrid& grid, int first, int last, int n);

// Coefficients of the L2-orthogonal projection of u0: solves M c = load(u0).
std::vector<double> l2_project_initial(const Mesh& mesh, const SparseSymMatrix& M,
                                       const SpatialFn& u0, const QuadConfig& qc = {});

// Load vectors of the per-step time averages tau^{-1} int_{I_k} g dt,
// indexed 1..K; the time integral uses 3-point Gauss per step.
Trajectory time_averaged_load(const SpaceTimeFn& g, const Mesh& mesh, const TimeGrid& grid,
                              const QuadConfig& qc = {});

// Tracking-target coefficients D^k, k = 1..K: the L2 projection of
// u_d(t_k) (or of its time average over I_k when time_average is set).
Trajectory project_tracking_target(const SpaceTimeFn& ud, const Mesh& mesh,
                                   const SparseSymMatrix& M, const TimeGrid& grid,
                                   bool time_average = false, const QuadConfig& qc = {});

// Backward Euler sweep: (M + tau K) U^{k+1} = M U^k + tau (F^{k+1} + B Z^{k+1}),
// U^0 given. Result indexed 0..K. A_sys must equal M + tau K.
Trajectory solve_state_forward(const SparseSymMatrix& K, const SparseSymMatrix& M,
                               const Trajectory& f_traj, const ControlField& Z,
                               const std::vector<double>& U0, const TimeGrid& grid);

// Adjoint sweep: (M + tau K) P^k = M P^{k+1} + tau M (U^{k+1} - D^{k+1}),
// P^K = 0. U indexed 0..K, ud_traj (the D coefficients) 1..K.
Trajectory solve_adjoint_backward(const SparseSymMatrix& K, const SparseSymMatrix& M,
                                  const Trajectory& U, const Trajectory& ud_traj,
                                  const TimeGrid& grid);

// Per-step CSV "k,t,coeff_0,...".
std::string dump_trajectory(const Trajectory& traj);

}  // namespace fhc
