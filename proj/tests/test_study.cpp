#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fhc/study.hpp"

using namespace fhc;

namespace {

const char* kCsvHeader =
    "s,level,h,tau,ndofs,err_state_l2q,err_state_energy,err_control_l2q,"
    "eoc_state,eoc_control,walltime_s";

}  // namespace

TEST_CASE("rate formulas") {
  CHECK(control_rate(0.25, 0.01) == doctest::Approx(0.74).epsilon(1e-13));
  CHECK(control_rate(0.5, 0.01) == doctest::Approx(0.99).epsilon(1e-13));
  CHECK(control_rate(0.75, 0.01) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(state_rate(0.25, 0.01) == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(state_rate(0.5, 0.01) == doctest::Approx(0.99).epsilon(1e-13));
  CHECK(state_rate(0.75, 0.01) == doctest::Approx(0.99).epsilon(1e-13));
}

TEST_CASE("study config validation") {
  StudyConfig cfg;
  cfg.levels = {16, 8};
  CHECK_THROWS_AS(cfg.validate(), std::exception);
  cfg.levels = {8, 16};
  cfg.s_values = {1.2};
  CHECK_THROWS_AS(cfg.validate(), std::exception);
  cfg.s_values = {0.5};
  cfg.mu = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::exception);
  cfg.mu = 0.1;
  cfg.a = 0.6;
  cfg.b = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::exception);
}

TEST_CASE("manufactured study produces finite errors and rates") {
  StudyConfig cfg;
  cfg.problem = ProblemKind::manufactured_1d;
  cfg.s_values = {0.5};
  cfg.levels = {8, 16};
  StudyResult res = run_convergence_study(cfg);
  REQUIRE(res.records.size() == 2);
  const ConvergenceRecord& a = res.records[0];
  const ConvergenceRecord& b = res.records[1];
  CHECK(!a.failed);
  CHECK(!b.failed);
  CHECK(a.h == doctest::Approx(0.25));
  CHECK(b.h == doctest::Approx(0.125));
  CHECK(a.ndofs == 7);
  CHECK(b.ndofs == 15);
  CHECK(a.err_state_l2q > 0.0);
  CHECK(a.err_control_l2q > 0.0);
  CHECK(b.err_state_l2q < a.err_state_l2q);
  CHECK(!a.has_eoc);
  REQUIRE(b.has_eoc);
  CHECK(b.eoc_state.rate > 0.0);
  CHECK(res.csv.rfind(kCsvHeader, 0) == 0);
  // One data row per level plus the header.
  int rows = 0;
  for (char ch : res.csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 3);
  CHECK(res.plot_files.size() == 2);
  CHECK(res.summary.find("predicted control rate") != std::string::npos);
}

TEST_CASE("single-level study records no rate") {
  StudyConfig cfg;
  cfg.problem = ProblemKind::manufactured_1d;
  cfg.s_values = {0.5};
  cfg.levels = {8};
  StudyResult res = run_convergence_study(cfg);
  REQUIRE(res.records.size() == 1);
  CHECK(!res.records[0].failed);
  CHECK(!res.records[0].has_eoc);
}

TEST_CASE("temporal study measures against the step-refined reference") {
  StudyConfig cfg;
  cfg.problem = ProblemKind::manufactured_1d;
  cfg.study = StudyKind::temporal;
  cfg.s_values = {0.5};
  cfg.temporal_mesh_level = 16;
  cfg.temporal_steps = {2, 4};
  StudyResult res = run_convergence_study(cfg);
  REQUIRE(res.records.size() == 2);
  CHECK(!res.records[0].failed);
  CHECK(!res.records[1].failed);
  CHECK(res.records[0].h == res.records[1].h);
  CHECK(res.records[0].tau == doctest::Approx(0.5));
  CHECK(res.records[1].tau == doctest::Approx(0.25));
  CHECK(res.records[1].err_state_l2q < res.records[0].err_state_l2q);
  REQUIRE(res.records[1].has_eoc);
  CHECK(res.records[1].eoc_state.rate > 0.3);  // first-order trend, coarse steps
}

TEST_CASE("perturbing the discrete loads destroys the convergence rate") {
  // Guards the error pipeline itself: O(h^{1/2}) load noise must surface
  // as a visibly larger state error on the finer level.
  double s = 0.5;
  StudyConfig cfg;
  ExactTriple triple;
  bool has_triple = false;
  ProblemSpec spec = make_study_problem(ProblemKind::manufactured_1d, s, cfg, triple,
                                        has_triple);
  REQUIRE(has_triple);
  double gamma = control_rate(s, cfg.epsilon);
  std::vector<double> clean, noisy;
  for (int level : {16, 32}) {
    double h = 2.0 / level;
    Mesh mesh = build_mesh(spec.domain, h, 1.0);
    TimeGrid grid = coupled_time_grid(cfg.T, h, gamma);
    DiscreteProblem dp = build_discrete_problem(spec, mesh, grid);
    ControlSolution sol = solve_control_bfgs(dp, cfg.opt_tol, cfg.opt_max_iter);
    clean.push_back(l2q_error(triple.ubar, triple.ubar_l2q_sq, sol.state, mesh, dp.M));

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (double& v : dp.f_traj.data) v += 0.5 * std::sqrt(h) * U(rng);
    ControlSolution bad = solve_control_bfgs(dp, cfg.opt_tol, cfg.opt_max_iter);
    noisy.push_back(l2q_error(triple.ubar, triple.ubar_l2q_sq, bad.state, mesh, dp.M));
  }
  CHECK(noisy[1] > 2.0 * clean[1]);
  double clean_rate = std::log(clean[0] / clean[1]) / std::log(2.0);
  double noisy_rate = std::log(noisy[0] / noisy[1]) / std::log(2.0);
  CHECK(noisy_rate < clean_rate - 0.2);
}
