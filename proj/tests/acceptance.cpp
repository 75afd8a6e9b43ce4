// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavy studies print progress to stderr as they go.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fhc/cg.hpp"
#include "fhc/checks.hpp"
#include "fhc/config.hpp"
#include "fhc/errors.hpp"
#include "fhc/exact.hpp"
#include "fhc/optimize.hpp"
#include "fhc/study.hpp"

using namespace fhc;

namespace {

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
  g_results.push_back({id, name, pass, detail});
  std::fprintf(stderr, "[acceptance] criterion %d done: %s\n", id, pass ? "pass" : "FAIL");
}

double now_s() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

StudyConfig base_config() {
  StudyConfig cfg;
  cfg.problem = ProblemKind::manufactured_1d;
  cfg.levels = {64, 128, 256, 512};
  return cfg;
}

// ---------------------------------------------------------------- 1 and 2
void run_convergence_criteria() {
  StudyConfig cfg = base_config();
  bool pass_control = true, pass_state = true;
  std::ostringstream dc, ds;
  for (double s : {0.25, 0.5, 0.75}) {
    std::fprintf(stderr, "[acceptance] spatial study s=%.2f (t=%.0fs)\n", s, now_s());
    cfg.s_values = {s};
    StudyResult res = run_convergence_study(cfg);
    const ConvergenceRecord* finest = nullptr;
    for (const auto& r : res.records)
      if (!r.failed) finest = &r;
    if (!finest || !finest->has_eoc || finest->eoc_control.below_tolerance ||
        finest->eoc_state.below_tolerance) {
      pass_control = pass_state = false;
      dc << " s=" << s << ": study incomplete;";
      continue;
    }
    double want_z = control_rate(s, cfg.epsilon);
    double want_u = state_rate(s, cfg.epsilon);
    double got_z = finest->eoc_control.rate;
    double got_u = finest->eoc_state.rate;
    if (std::abs(got_z - want_z) > 0.15) pass_control = false;
    if (std::abs(got_u - want_u) > 0.15) pass_state = false;
    dc << " s=" << s << ": eoc=" << fmt(got_z) << " expected " << fmt(want_z) << "+-0.15;";
    ds << " s=" << s << ": eoc=" << fmt(got_u) << " expected " << fmt(want_u) << "+-0.15;";
  }
  record(1, "control-convergence-rate", pass_control, dc.str());

  // Temporal half of criterion 2: fixed fine mesh, steps halved, reference
  // at one-eighth the finest step; first-order trend on the finest pair.
  std::fprintf(stderr, "[acceptance] temporal study (t=%.0fs)\n", now_s());
  StudyConfig tc = base_config();
  tc.study = StudyKind::temporal;
  tc.s_values = {0.5};
  tc.temporal_mesh_level = 128;
  tc.temporal_steps = {8, 16, 32, 64};
  StudyResult tres = run_convergence_study(tc);
  bool pass_temporal = false;
  double got_t = 0.0;
  if (tres.records.size() == 4 && !tres.records.back().failed &&
      tres.records.back().has_eoc && !tres.records.back().eoc_state.below_tolerance) {
    got_t = tres.records.back().eoc_state.rate;
    pass_temporal = std::abs(got_t - 1.0) <= 0.2;
  }
  ds << " temporal: eoc=" << fmt(got_t) << " expected 1+-0.2";
  record(2, "state-convergence-rate", pass_state && pass_temporal, ds.str());
}

// --------------------------------------------------------------------- 3
void run_oracle_criterion() {
  bool pass = true;
  std::ostringstream d;
  for (double s : {0.25, 0.5, 0.75}) {
    CheckResult r = check_oracle_1d(s, 8);
    pass = pass && r.pass;
    d << " 1d s=" << s << ": " << fmt(r.worst) << "<=" << fmt(r.bound) << ";";
  }
  for (double s : {0.25, 0.5, 0.75}) {
    std::fprintf(stderr, "[acceptance] 2d oracle s=%.2f (t=%.0fs)\n", s, now_s());
    CheckResult r = check_oracle_2d(s);
    pass = pass && r.pass;
    d << " 2d s=" << s << ": " << fmt(r.worst) << "<=" << fmt(r.bound) << ";";
  }
  record(3, "assembly-oracle-equivalence", pass, d.str());
}

// --------------------------------------------------------------------- 4
void run_eigen_identity_criterion() {
  // At s = 1/2 the forcing 1 produces (1-x^2)^{1/2}; the Galerkin solution
  // must approach it monotonically in L2.
  std::vector<double> errors;
  for (int level : {16, 32, 64, 128}) {
    Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 2.0 / level, 1.0);
    SparseSymMatrix K = fractional_stiffness(mesh, make_kernel_params(1, 0.5));
    std::vector<double> F = load_vector(mesh, [](const double*) { return 1.0; });
    auto [U, rep] = cg_solve(K, F, 1e-12);
    if (!rep.converged) {
      record(4, "eigen-identity-galerkin", false, "solver failed at level " +
                                                      std::to_string(level));
      return;
    }
    TimeGrid unit = make_time_grid(1.0, 1);
    Trajectory tr = make_trajectory(unit, 1, 1, mesh.n_dofs());
    for (int i = 0; i < mesh.n_dofs(); ++i) tr.frame(1)[i] = U[i];
    SparseSymMatrix M = mass_matrix(mesh);
    double err = l2q_error(
        [](double, const double* x) { return std::sqrt(std::max(0.0, 1.0 - x[0] * x[0])); },
        4.0 / 3.0, tr, mesh, M);
    errors.push_back(err);
  }
  bool pass = true;
  std::ostringstream d;
  d << " errors:";
  for (size_t i = 0; i < errors.size(); ++i) {
    d << " " << fmt(errors[i]);
    if (i > 0 && !(errors[i] < errors[i - 1])) pass = false;
  }
  record(4, "eigen-identity-galerkin", pass, d.str());
}

// --------------------------------------------------------------------- 5
void run_gradient_criterion() {
  bool pass = true;
  std::ostringstream d;
  unsigned seed = 42;
  for (double s : {0.25, 0.75}) {
    CheckResult r = check_gradient_fd(s, 64, 32, 10, seed++);
    pass = pass && r.pass;
    d << " s=" << s << ": worst=" << fmt(r.worst) << " bound=" << fmt(r.bound) << ";";
  }
  record(5, "gradient-finite-difference", pass, d.str());
}

// --------------------------------------------------------------------- 6
void run_duality_criterion() {
  CheckResult r = check_duality(32, 16, 42);
  record(6, "duality-summation-by-parts", r.pass,
         " worst=" + fmt(r.worst) + " bound=" + fmt(r.bound));
}

// --------------------------------------------------------------------- 7
void run_stability_criterion() {
  // Exact discrete energy inequality: the ratio
  //   (|U^K|_M^2 + sum tau |U^k|_K^2) / (|U^0|_M^2 + sum tau |F^k|_{K^-1}^2)
  // cannot exceed 1; the criterion allows 1.1. tau = 10 h makes the steps
  // much coarser than the mesh.
  StudyConfig cfg = base_config();
  ExactTriple triple;
  bool has_triple = false;
  ProblemSpec spec =
      make_study_problem(ProblemKind::manufactured_1d, 0.5, cfg, triple, has_triple);
  bool pass = true;
  std::ostringstream d;
  for (int level : {32, 64, 128}) {
    double h = 2.0 / level;
    Mesh mesh = build_mesh(spec.domain, h, 1.0);
    for (double tau_target : {h, 10.0 * h}) {
      int K_steps = std::max(1, (int)std::llround(spec.T / tau_target));
      TimeGrid grid = make_time_grid(spec.T, K_steps);
      DiscreteProblem dp = build_discrete_problem(spec, mesh, grid);
      ControlField Z = make_control(mesh, grid);
      Trajectory U = solve_state_forward(dp.K, dp.M, dp.f_traj, Z, dp.U0, grid);

      int n = mesh.n_dofs();
      double tau = grid.tau();
      auto quad = [&](const SparseSymMatrix& G, const double* v) {
        std::vector<double> x(v, v + n), y(n);
        G.multiply(x, y);
        double q = 0.0;
        for (int i = 0; i < n; ++i) q += x[i] * y[i];
        return q;
      };
      double lhs = quad(dp.M, U.frame(grid.K_steps));
      for (int k = 1; k <= grid.K_steps; ++k) lhs += tau * quad(dp.K, U.frame(k));
      double rhs = quad(dp.M, dp.U0.data());
      for (int k = 1; k <= grid.K_steps; ++k) {
        std::vector<double> F(dp.f_traj.frame(k), dp.f_traj.frame(k) + n);
        auto [w, rep] = cg_solve(dp.K, F, 1e-12);
        if (!rep.converged) pass = false;
        double q = 0.0;
        for (int i = 0; i < n; ++i) q += F[i] * w[i];
        rhs += tau * q;
      }
      double ratio = lhs / rhs;
      if (!(ratio <= 1.1)) pass = false;
      d << " N=" << level << (tau_target > h ? " tau=10h" : " tau=h") << ": "
        << fmt(ratio) << ";";
    }
  }
  record(7, "unconditional-stability", pass, d.str());
}

// --------------------------------------------------------------------- 8
void run_fixed_point_criterion() {
  StudyConfig cfg = base_config();
  bool pass = true;
  std::ostringstream d;
  for (double s : {0.25, 0.5, 0.75}) {
    ExactTriple triple;
    bool has_triple = false;
    ProblemSpec spec = make_study_problem(ProblemKind::manufactured_1d, s, cfg, triple,
                                          has_triple);
    double h = 2.0 / 64;
    Mesh mesh = build_mesh(spec.domain, h, 1.0);
    TimeGrid grid = coupled_time_grid(spec.T, h, control_rate(s, cfg.epsilon));
    DiscreteProblem dp = build_discrete_problem(spec, mesh, grid);
    ControlSolution sol = solve_control_bfgs(dp, 0.0, cfg.opt_max_iter);
    ControlField Pproj = project_control(sol.adjoint, mesh, -1);
    double r = optimality_residual(sol.Z, Pproj, spec.mu, spec.a, spec.b);
    double bound = 1e-6 * (1.0 + control_l2q_norm(sol.Z));
    if (!(r <= bound) || !sol.report.converged) pass = false;
    d << " s=" << s << ": residual=" << fmt(r) << " bound=" << fmt(bound) << ";";
  }
  record(8, "optimality-fixed-point", pass, d.str());
}

// --------------------------------------------------------------------- 9
void run_uniqueness_criterion() {
  StudyConfig cfg = base_config();
  ExactTriple triple;
  bool has_triple = false;
  ProblemSpec spec =
      make_study_problem(ProblemKind::manufactured_1d, 0.5, cfg, triple, has_triple);
  double h = 2.0 / 64;
  Mesh mesh = build_mesh(spec.domain, h, 1.0);
  TimeGrid grid = coupled_time_grid(spec.T, h, control_rate(0.5, cfg.epsilon));
  DiscreteProblem dp = build_discrete_problem(spec, mesh, grid);

  auto random_start = [&](unsigned seed) {
    ControlField Z = make_control(mesh, grid);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(spec.a, spec.b);
    for (double& v : Z.value) v = U(rng);
    return Z;
  };
  ControlField Z1 = random_start(1001), Z2 = random_start(2002);
  // 1e-8 sits above the residual noise floor left by the inner cg solves
  // and two decades under the allowed disagreement.
  ControlSolution s1 = solve_control_bfgs(dp, 1e-8, cfg.opt_max_iter, &Z1);
  ControlSolution s2 = solve_control_bfgs(dp, 1e-8, cfg.opt_max_iter, &Z2);
  double dist = discrete_l2q_distance(s1.Z, s2.Z);
  // "the optimality tolerance" is criterion 8's bound 1e-6 (1 + |Z|).
  double tol = 1e-6 * (1.0 + control_l2q_norm(s1.Z));
  bool pass = s1.report.converged && s2.report.converged && dist <= 10.0 * tol;
  record(9, "uniqueness-random-starts", pass,
         " distance=" + fmt(dist) + " allowed=" + fmt(10.0 * tol));
}

// -------------------------------------------------------------------- 10
void run_2d_criterion() {
  StudyConfig cfg;
  cfg.problem = ProblemKind::manufactured_2d_I;
  cfg.s_values = {0.75};
  cfg.levels = {8, 16, 32};  // reduced levels: rate bands reported, the
                             // graded-vs-uniform ordering asserted
  std::fprintf(stderr, "[acceptance] 2d study kappa=1 (t=%.0fs)\n", now_s());
  StudyResult uni = run_convergence_study(cfg);
  cfg.kappa = 2.0;
  std::fprintf(stderr, "[acceptance] 2d study kappa=2 (t=%.0fs)\n", now_s());
  StudyResult grad = run_convergence_study(cfg);

  auto finest = [](const StudyResult& r) -> const ConvergenceRecord* {
    const ConvergenceRecord* f = nullptr;
    for (const auto& rec : r.records)
      if (!rec.failed && rec.has_eoc) f = &rec;
    return f;
  };
  const ConvergenceRecord* fu = finest(uni);
  const ConvergenceRecord* fg = finest(grad);
  bool pass = fu != nullptr && fg != nullptr;
  std::ostringstream d;
  if (pass) {
    double want_z = control_rate(0.75, cfg.epsilon);
    double want_u = state_rate(0.75, cfg.epsilon);
    d << " uniform: eoc_z=" << fmt(fu->eoc_control.rate) << " (theorem " << fmt(want_z)
      << "), eoc_u=" << fmt(fu->eoc_state.rate) << " (theorem " << fmt(want_u) << ");";
    d << " graded: eoc_u=" << fmt(fg->eoc_state.rate) << ";";
    bool in_band = std::abs(fu->eoc_control.rate - want_z) <= 0.25 &&
                   std::abs(fu->eoc_state.rate - want_u) <= 0.25;
    d << (in_band ? " bands met;" : " bands informational at reduced levels;");
    if (!(fg->eoc_state.rate > fu->eoc_state.rate)) {
      pass = false;
      d << " grading did not improve the state rate;";
    }
  } else {
    d << " study incomplete";
  }
  record(10, "2d-reproduction", pass, d.str());
}

}  // namespace

int main() {
  std::fprintf(stderr, "[acceptance] start\n");
  run_oracle_criterion();
  run_eigen_identity_criterion();
  run_gradient_criterion();
  run_duality_criterion();
  run_stability_criterion();
  run_fixed_point_criterion();
  run_uniqueness_criterion();
  run_2d_criterion();
  run_convergence_criteria();

  std::sort(g_results.begin(), g_results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failures = 0;
  for (const Criterion& c : g_results) {
    std::printf("%s criterion-%d %s:%s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("acceptance: %d/%zu criteria passed (%.0f s)\n",
              (int)g_results.size() - failures, g_results.size(), now_s());
  return failures == 0 ? 0 : 1;
}
