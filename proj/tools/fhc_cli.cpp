#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fhc/checks.hpp"
#include "fhc/config.hpp"
#include "fhc/control.hpp"
#include "fhc/errors.hpp"
#include "fhc/exact.hpp"
#include "fhc/optimize.hpp"
#include "fhc/study.hpp"
#include "fhc/timestepping.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct StageFailure : std::runtime_error {
  StageFailure(const std::string& stage, const std::string& what)
      : std::runtime_error("numerical failure in " + stage + ": " + what) {}
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fhc::RunConfig load_config(const std::string& path) {
  return fhc::run_config_from(fhc::parse_config_file(path));
}

std::filesystem::path prepare_out_dir(const fhc::RunConfig& rc) {
  std::filesystem::path dir(rc.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Problem data for the single-solve subcommands: first s, finest level.
struct SingleSetup {
  double s = 0.5;
  fhc::ProblemSpec spec;
  fhc::ExactTriple triple;
  bool has_triple = false;
  fhc::Mesh mesh;
  fhc::TimeGrid grid;
};

SingleSetup make_single(const fhc::RunConfig& rc) {
  SingleSetup su;
  const fhc::StudyConfig& sc = rc.study;
  su.s = sc.s_values.front();
  su.spec = fhc::make_study_problem(sc.problem, su.s, sc, su.triple, su.has_triple);
  int level = sc.levels.back();
  double h = 2.0 / level;
  su.mesh = fhc::build_mesh(su.spec.domain, h, sc.kappa);
  su.grid = fhc::coupled_time_grid(sc.T, h, fhc::control_rate(su.s, sc.epsilon));
  return su;
}

int cmd_solve_state(const fhc::RunConfig& rc) {
  auto dir = prepare_out_dir(rc);
  SingleSetup su = make_single(rc);
  fhc::DiscreteProblem dp = stage("assembly", [&] {
    return fhc::build_discrete_problem(su.spec, su.mesh, su.grid, rc.study.quad,
                                       rc.study.ud_time_average);
  });
  fhc::ControlField Z = su.has_triple
                            ? fhc::project_control(su.triple.zbar, su.mesh, su.grid, rc.study.quad)
                            : fhc::make_control(su.mesh, su.grid);
  fhc::Trajectory U = stage("state-solve", [&] {
    return fhc::solve_state_forward(dp.K, dp.M, dp.f_traj, Z, dp.U0, su.grid);
  });

  std::ostringstream sum;
  sum << "problem = " << fhc::problem_name(rc.study.problem) << "\n";
  sum << "s = " << su.s << "\n";
  sum << "level = " << rc.study.levels.back() << " (h = " << su.mesh.target_h
      << ", dofs = " << su.mesh.n_dofs() << ")\n";
  sum << "steps = " << su.grid.K_steps << " (tau = " << su.grid.tau() << ")\n";
  if (su.has_triple) {
    double err = stage("error-evaluation", [&] {
      return fhc::l2q_error(su.triple.ubar, su.triple.ubar_l2q_sq, U, su.mesh, dp.M,
                            rc.study.quad);
    });
    sum << "state_l2q_error_vs_exact_optimum = " << err
        << "  (state driven by the projected exact control)\n";
  }
  write_file(dir / "state.csv", fhc::dump_trajectory(U));
  write_file(dir / "summary.txt", sum.str());
  write_file(dir / "manifest.cfg", fhc::render_manifest(rc, "solve-state"));
  std::cout << sum.str();
  std::cout << "wrote " << (dir / "state.csv").string() << "\n";
  return 0;
}

int cmd_solve_control(const fhc::RunConfig& rc) {
  auto dir = prepare_out_dir(rc);
  SingleSetup su = make_single(rc);
  fhc::DiscreteProblem dp = stage("assembly", [&] {
    return fhc::build_discrete_problem(su.spec, su.mesh, su.grid, rc.study.quad,
                                       rc.study.ud_time_average);
  });
  fhc::ControlSolution sol = stage("optimize", [&] {
    return fhc::solve_control_bfgs(dp, rc.study.opt_tol, rc.study.opt_max_iter);
  });

  std::ostringstream sum;
  sum << "problem = " << fhc::problem_name(rc.study.problem) << "\n";
  sum << "s = " << su.s << "\n";
  sum << "level = " << rc.study.levels.back() << " (h = " << su.mesh.target_h
      << ", dofs = " << su.mesh.n_dofs() << ")\n";
  sum << "steps = " << su.grid.K_steps << " (tau = " << su.grid.tau() << ")\n";
  sum << "iterations = " << sol.report.iterations
      << (sol.report.converged ? " (converged)" : " (max iterations)") << "\n";
  sum << "objective = " << sol.report.final_objective << "\n";
  sum << "optimality_residual = " << sol.report.final_residual << "\n";
  if (su.has_triple) {
    double errz = stage("error-evaluation", [&] {
      return fhc::l2q_error(su.triple.zbar, su.triple.zbar_l2q_sq, sol.Z, rc.study.quad);
    });
    double erru = stage("error-evaluation", [&] {
      return fhc::l2q_error(su.triple.ubar, su.triple.ubar_l2q_sq, sol.state, su.mesh, dp.M,
                            rc.study.quad);
    });
    sum << "control_l2q_error = " << errz << "\n";
    sum << "state_l2q_error = " << erru << "\n";
  }
  write_file(dir / "control.csv", fhc::dump_control(sol.Z));
  write_file(dir / "state.csv", fhc::dump_trajectory(sol.state));
  write_file(dir / "adjoint.csv", fhc::dump_trajectory(sol.adjoint));
  write_file(dir / "optimizer.csv", fhc::dump_report(sol.report));
  write_file(dir / "summary.txt", sum.str());
  write_file(dir / "manifest.cfg", fhc::render_manifest(rc, "solve-control"));
  std::cout << sum.str();
  std::cout << "wrote " << (dir / "control.csv").string() << "\n";
  return 0;
}

int cmd_convergence(const fhc::RunConfig& rc) {
  auto dir = prepare_out_dir(rc);
  fhc::StudyResult res = fhc::run_convergence_study(rc.study);
  write_file(dir / "study.csv", res.csv);
  write_file(dir / "summary.txt", res.summary);
  for (const auto& [name, content] : res.plot_files) write_file(dir / name, content);
  write_file(dir / "manifest.cfg", fhc::render_manifest(rc, "convergence"));
  std::cout << res.summary;

  bool any_ok = false;
  std::string first_failure;
  for (const auto& r : res.records) {
    if (!r.failed) any_ok = true;
    else if (first_failure.empty()) first_failure = r.failure;
  }
  if (!any_ok) throw StageFailure("convergence-study", first_failure.empty() ? "all levels failed" : first_failure);
  std::cout << "wrote " << (dir / "study.csv").string() << "\n";
  return 0;
}

int cmd_check(unsigned seed) {
  std::vector<fhc::CheckResult> results = fhc::run_check_suites(seed);
  bool all = true;
  for (const auto& r : results) {
    std::cout << fhc::format_check_line(r) << "\n";
    all = all && r.pass;
  }
  if (!all) {
    std::ostringstream names;
    for (const auto& r : results)
      if (!r.pass) names << " " << r.name;
    throw StageFailure("check:" + names.str(), "suite bound exceeded");
  }
  std::cout << "all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-constrained optimal control of the fractional heat equation"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned check_seed = 42;
  std::string check_config;

  CLI::App* s_state = app.add_subcommand("solve-state", "run one forward solve at the finest configured level");
  s_state->add_option("--config", config_path, "key = value configuration file")->required();
  CLI::App* s_ctrl = app.add_subcommand("solve-control", "solve the control problem at the finest configured level");
  s_ctrl->add_option("--config", config_path, "key = value configuration file")->required();
  CLI::App* s_conv = app.add_subcommand("convergence", "run the configured convergence study");
  s_conv->add_option("--config", config_path, "key = value configuration file")->required();
  CLI::App* s_check = app.add_subcommand("check", "run the verification suites");
  s_check->add_option("--seed", check_seed, "seed for the randomized suites");
  s_check->add_option("--config", check_config, "optional configuration supplying the seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (s_check->parsed()) {
      if (!check_config.empty()) {
        fhc::RunConfig rc = load_config(check_config);
        check_seed = rc.study.seed;
      }
      return cmd_check(check_seed);
    }
    fhc::RunConfig rc = load_config(config_path);
    if (s_state->parsed()) return cmd_solve_state(rc);
    if (s_ctrl->parsed()) return cmd_solve_control(rc);
    return cmd_convergence(rc);
  } catch (const fhc::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const StageFailure& e) {
    std::cerr << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure in pipeline: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
