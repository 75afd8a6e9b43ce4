#pragma once

#include <string>
#include <vector>

#include "fhc/assembly.hpp"

namespace fhc {

// One verification suite outcome: the worst observed deviation and the
// bound it had to stay under.
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double bound = 0.0;
  std::string detail;
};

// Entrywise relative agreement of the assembled stiffness matrix with the
// shift-correlation oracle. The 2D variant uses the coarsest disc mesh.
CheckResult check_oracle_1d(double s, int cells, const QuadConfig& qc = {});
CheckResult check_oracle_2d(double s, const QuadConfig& qc = {});

// Central finite differences of the reduced objective against the computed
// gradient on seeded random control/direction pairs (manufactured 1D data).
CheckResult check_gradient_fd(double s, int n_cells, int n_steps, int n_pairs,
                              unsigned seed);

// Discrete summation-by-parts identity tying the forward and backward
// solves on seeded random data.
CheckResult check_duality(int n_cells, int n_steps, unsigned seed);

// Projection algebra of the piecewise-constant control space: cell means
// and orthogonality of the residual to the space.
CheckResult check_projection(unsigned seed);

// The suites run by the `check` subcommand.
std::vector<CheckResult> run_check_suites(unsigned seed);

std::string format_check_line(const CheckResult& r);

}  // namespace fhc
