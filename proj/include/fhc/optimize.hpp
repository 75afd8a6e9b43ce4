#pragma once

#include <string>
#include <vector>

#include "fhc/control.hpp"
#include "fhc/timestepping.hpp"

namespace fhc {

// One discretization of one control problem: matrices and per-step data
// shared by every objective and gradient evaluation.
struct DiscreteProblem {
  const Mesh* mesh = nullptr;
  TimeGrid grid;
  double mu = 0.0, a = 0.0, b = 0.0;
  SparseSymMatrix K, M;
  Trajectory f_traj;   // 1..K, time-averaged loads
  Trajectory ud_traj;  // 1..K, tracking-target projection coefficients
  std::vector<double> U0;
};

DiscreteProblem build_discrete_problem(const ProblemSpec& spec, const Mesh& mesh,
                                       const TimeGrid& grid, const QuadConfig& qc = {},
                                       bool ud_time_average = false);

struct ObjectiveValue {
  double total = 0.0;
  double tracking = 0.0;  // (1/2) sum_k tau |U^k - D^k|_M^2
  double control = 0.0;   // (mu/2) |Z|_{L2(Q)}^2
};

// Tracking and control terms for a state already solved for Z.
ObjectiveValue objective_of_state(const Trajectory& U, const ControlField& Z,
                                  const DiscreteProblem& dp);
// Runs the forward solve, then evaluates the discrete functional.
ObjectiveValue reduced_objective(const ControlField& Z, const DiscreteProblem& dp);

// Exact gradient mu Z + projection of the adjoint (frame k-1 pairs with
// control step k). Optionally returns the state and adjoint it solved.
ControlField reduced_gradient(const ControlField& Z, const DiscreteProblem& dp,
                              Trajectory* state_out = nullptr,
                              Trajectory* adjoint_out = nullptr);

// |Z - proj_{[a,b]}(-P_projected / mu)| in L2(Q); zero exactly at the
// solution of the discrete variational inequality.
double optimality_residual(const ControlField& Z, const ControlField& P_projected, double mu,
                           double a, double b);

struct OptimizeReport {
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  double final_residual = 0.0;
  std::vector<double> objective_history;  // non-increasing
  std::vector<double> residual_history;
  std::vector<double> step_history;
};

struct ControlSolution {
  ControlField Z;
  Trajectory state;
  Trajectory adjoint;
  OptimizeReport report;
};

// Projected limited-memory BFGS on the reduced problem. tol <= 0 selects
// the adaptive default 1e-8 * (1 + |J|). Z_init, when given, is projected
// into the box and used as the starting iterate.
ControlSolution solve_control_bfgs(const DiscreteProblem& dp, double tol = 0.0,
                                   int max_iter = 500, const ControlField* Z_init = nullptr);

ControlSolution solve_control_bfgs(const ProblemSpec& spec, const Mesh& mesh,
                                   const TimeGrid& grid, double tol = 0.0, int max_iter = 500,
                                   const QuadConfig& qc = {});

// CSV iteration log "iter,J,residual,step_length".
std::string dump_report(const OptimizeReport& rep);

}  // namespace fhc
