#pragma once

#include <string>
#include <vector>

#include "fhc/sparse.hpp"

namespace fhc {

enum class Precond { none, jacobi };

struct SolverReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradients for SPD systems. Returns the best
// iterate with converged=false on hitting max_iter; throws on NaN.
std::pair<std::vector<double>, SolverReport> cg_solve(const SparseSymMatrix& A,
                                                      const std::vector<double>& b,
                                                      double tol = 1e-10, int max_iter = 10000,
                                                      Precond precond = Precond::jacobi,
                                                      const std::vector<double>* x0 = nullptr);

}  // namespace fhc
