#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fhc/errors.hpp"
#include "fhc/exact.hpp"
#include "fhc/optimize.hpp"

namespace fhc {

enum class ProblemKind { manufactured_1d, manufactured_2d_I, problem_2d_II };
enum class StudyKind { spatial, temporal };

struct StudyConfig {
  ProblemKind problem = ProblemKind::manufactured_1d;
  StudyKind study = StudyKind::spatial;
  std::vector<double> s_values{0.5};
  double mu = 0.1;
  double a = -0.5;
  double b = 0.5;
  double T = 1.0;
  double kappa = 1.0;
  double epsilon = 0.01;          // slack in the step-coupling exponent
  std::vector<int> levels{16, 32, 64};  // cells across the diameter; h = 2/level
  int temporal_mesh_level = 64;
  std::vector<int> temporal_steps{8, 16, 32, 64};  // reference runs at 8x the finest
  double opt_tol = 0.0;
  int opt_max_iter = 500;
  QuadConfig quad{};
  bool ud_time_average = false;
  unsigned seed = 42;
  void validate() const;
};

struct ConvergenceRecord {
  double s = 0.0;
  int level = 0;
  double h = 0.0;
  double tau = 0.0;
  int ndofs = 0;
  double err_state_l2q = 0.0;
  double err_state_energy = 0.0;
  double err_control_l2q = 0.0;
  bool has_eoc = false;  // first level of a series has no pairwise rate
  EocEntry eoc_state, eoc_control;
  double walltime_s = 0.0;
  bool opt_converged = true;
  bool failed = false;
  std::string failure;
};

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  std::string csv;      // header + one row per successful level
  std::string summary;  // human-readable tables and notes
  std::vector<std::pair<std::string, std::string>> plot_files;  // name -> "x y" lines
};

// Coupling exponent gamma and the predicted convergence rates.
double control_rate(double s, double epsilon);
double state_rate(double s, double epsilon);

// Problem data for one study entry; fills the exact triple for the
// manufactured kinds and reports whether one exists.
ProblemSpec make_study_problem(ProblemKind kind, double s, const StudyConfig& cfg,
                               ExactTriple& triple, bool& has_triple);

StudyResult run_convergence_study(const StudyConfig& cfg);

}  // namespace fhc
