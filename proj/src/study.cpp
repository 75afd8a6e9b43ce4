#include "fhc/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fhc {

void StudyConfig::validate() const {
  if (s_values.empty()) throw std::invalid_argument("study: no s values");
  for (double s : s_values)
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("study: s outside (0,1)");
  if (study == StudyKind::spatial) {
    if (levels.empty()) throw std::invalid_argument("study: no mesh levels");
    for (size_t i = 0; i + 1 < levels.size(); ++i)
      if (levels[i] >= levels[i + 1])
        throw std::invalid_argument("study: levels must strictly increase");
    for (int l : levels)
      if (l < 1) throw std::invalid_argument("study: levels must be >= 1");
  } else {
    if (temporal_steps.empty()) throw std::invalid_argument("study: no temporal steps");
    for (size_t i = 0; i + 1 < temporal_steps.size(); ++i)
      if (temporal_steps[i] >= temporal_steps[i + 1])
        throw std::invalid_argument("study: temporal steps must strictly increase");
    if (temporal_mesh_level < 1) throw std::invalid_argument("study: bad temporal mesh level");
  }
  if (!(kappa >= 1.0 && kappa <= 2.0)) throw std::invalid_argument("study: kappa outside [1,2]");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("study: epsilon outside (0,1/2)");
  if (!(mu > 0.0)) throw std::invalid_argument("study: mu must be positive");
  if (!(a <= b)) throw std::invalid_argument("study: empty control box");
  bool two_d = problem != ProblemKind::manufactured_1d;
  (void)two_d;
}

double control_rate(double s, double epsilon) { return std::min(1.0, s + 0.5 - epsilon); }

double state_rate(double s, double epsilon) { return std::min(s, 0.5 - epsilon) + 0.5; }

ProblemSpec make_study_problem(ProblemKind kind, double s, const StudyConfig& cfg,
                               ExactTriple& triple, bool& has_triple) {
  TimeProfile profile = make_time_profile(
      [](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); },
      [T = cfg.T](double t) { return std::sin(T - t); },
      [T = cfg.T](double t) { return -std::cos(T - t); }, cfg.T);
  switch (kind) {
    case ProblemKind::manufactured_1d: {
      SpatialPair u = spatial_pair_1d(0, 0, s);
      auto [spec, tr] = build_manufactured(s, cfg.mu, cfg.a, cfg.b, cfg.T, u, u, profile,
                                           Domain::interval(-1.0, 1.0));
      triple = std::move(tr);
      has_triple = true;
      return spec;
    }
    case ProblemKind::manufactured_2d_I: {
      SpatialPair u = spatial_pair_2d(0, 1, s);
      SpatialPair v = spatial_pair_2d(0, 0, s);
      auto [spec, tr] =
          build_manufactured(s, cfg.mu, cfg.a, cfg.b, cfg.T, u, v, profile, Domain::disc(1.0));
      triple = std::move(tr);
      has_triple = true;
      return spec;
    }
    case ProblemKind::problem_2d_II: {
      has_triple = false;
      ProblemSpec spec;
      spec.s = s;
      spec.mu = cfg.mu;
      spec.a = cfg.a;
      spec.b = cfg.b;
      spec.T = cfg.T;
      spec.domain = Domain::disc(1.0);
      spec.f = [](double t, const double*) { return std::cos(t); };
      spec.u_d = [](double t, const double* x) {
        return std::cos(t) * (1.0 - x[0] * x[0] - x[1] * x[1]);
      };
      spec.u0 = [](const double* x) { return 1.0 - x[0] * x[0] - x[1] * x[1]; };
      spec.validate();
      return spec;
    }
  }
  throw std::logic_error("make_study_problem: unknown problem kind");
}

namespace {

struct LevelData {
  Mesh mesh;
  TimeGrid grid;
  Trajectory state;
  ControlField Z;
  SparseSymMatrix M;  // kept for the reference level's comparisons
  SparseSymMatrix K;
  bool ok = false;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header() {
  return "s,level,h,tau,ndofs,err_state_l2q,err_state_energy,err_control_l2q,eoc_state,"
         "eoc_control,walltime_s\n";
}

std::string csv_row(const ConvergenceRecord& r) {
  std::ostringstream os;
  os << fmt(r.s) << "," << r.level << "," << fmt(r.h) << "," << fmt(r.tau) << "," << r.ndofs
     << "," << fmt(r.err_state_l2q) << "," << fmt(r.err_state_energy) << ","
     << fmt(r.err_control_l2q) << ",";
  if (r.has_eoc) os << (r.eoc_state.below_tolerance ? "below_tol" : fmt(r.eoc_state.rate));
  os << ",";
  if (r.has_eoc) os << (r.eoc_control.below_tolerance ? "below_tol" : fmt(r.eoc_control.rate));
  os << "," << fmt(r.walltime_s) << "\n";
  return os.str();
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void fill_eoc(std::vector<ConvergenceRecord>& recs, size_t begin) {
  // Pairwise rates over the successful records of one series, keyed on the
  // per-record h (spatial) or tau (temporal; h constant there).
  std::vector<size_t> ok;
  for (size_t i = begin; i < recs.size(); ++i)
    if (!recs[i].failed) ok.push_back(i);
  for (size_t j = 1; j < ok.size(); ++j) {
    ConvergenceRecord& prev = recs[ok[j - 1]];
    ConvergenceRecord& cur = recs[ok[j]];
    double x0 = prev.h != cur.h ? prev.h : prev.tau;
    double x1 = prev.h != cur.h ? cur.h : cur.tau;
    auto rate = [&](double e0, double e1) {
      EocEntry ent;
      if (e0 == 0.0 || e1 == 0.0)
        ent.below_tolerance = true;
      else
        ent.rate = std::log(e0 / e1) / std::log(x0 / x1);
      return ent;
    };
    cur.has_eoc = true;
    cur.eoc_state = rate(prev.err_state_l2q, cur.err_state_l2q);
    cur.eoc_control = rate(prev.err_control_l2q, cur.err_control_l2q);
  }
}

}  // namespace

StudyResult run_convergence_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyResult out;
  std::ostringstream csv, summary;
  csv << csv_header();

  for (double s : cfg.s_values) {
    double gamma = control_rate(s, cfg.epsilon);
    ExactTriple triple;
    bool has_triple = false;
    ProblemSpec spec = make_study_problem(cfg.problem, s, cfg, triple, has_triple);
    size_t first_rec = out.records.size();
    std::vector<LevelData> data;
    data.reserve(cfg.levels.size());  // stable addresses; Z.mesh points into the slot

    summary << "s = " << s << ": predicted control rate " << control_rate(s, cfg.epsilon)
            << ", predicted state rate " << state_rate(s, cfg.epsilon) << "\n";

    if (cfg.study == StudyKind::spatial) {
      for (int level : cfg.levels) {
        ConvergenceRecord rec;
        rec.s = s;
        rec.level = level;
        rec.h = 2.0 / level;
        auto t0 = std::chrono::steady_clock::now();
        LevelData ld;
        try {
          ld.mesh = build_mesh(spec.domain, rec.h, cfg.kappa);
          ld.grid = coupled_time_grid(cfg.T, rec.h, gamma);
          rec.tau = ld.grid.tau();
          rec.ndofs = ld.mesh.n_dofs();
          DiscreteProblem dp =
              build_discrete_problem(spec, ld.mesh, ld.grid, cfg.quad, cfg.ud_time_average);
          ControlSolution sol = solve_control_bfgs(dp, cfg.opt_tol, cfg.opt_max_iter);
          rec.opt_converged = sol.report.converged;
          if (has_triple) {
            rec.err_state_l2q =
                l2q_error(triple.ubar, triple.ubar_l2q_sq, sol.state, ld.mesh, dp.M, cfg.quad);
            rec.err_control_l2q = l2q_error(triple.zbar, triple.zbar_l2q_sq, sol.Z, cfg.quad);
          }
          ld.state = std::move(sol.state);
          ld.Z = std::move(sol.Z);
          ld.M = std::move(dp.M);
          ld.K = std::move(dp.K);
          ld.ok = true;
        } catch (const std::exception& e) {
          rec.failed = true;
          rec.failure = e.what();
          summary << "  level " << level << " FAILED: " << e.what() << "\n";
        }
        rec.walltime_s = elapsed_s(t0);
        out.records.push_back(rec);
        data.push_back(std::move(ld));
        data.back().Z.mesh = &data.back().mesh;  // rebind after move
      }

      // Reference comparisons against the finest successful level: energy
      // errors always; state/control errors too when no exact triple exists.
      int ref = -1;
      for (int i = (int)data.size() - 1; i >= 0; --i)
        if (data[i].ok) {
          ref = i;
          break;
        }
      if (ref >= 0) {
        const LevelData& fine = data[ref];
        for (size_t i = 0; i < data.size(); ++i) {
          if (!data[i].ok) continue;
          ConvergenceRecord& rec = out.records[first_rec + i];
          if ((int)i == ref) {
            // self-distance; stays zero
          } else {
            Trajectory uf = transfer_trajectory(data[i].mesh, data[i].state, fine.mesh);
            rec.err_state_energy = discrete_l2q_distance(uf, fine.state, fine.K);
            if (!has_triple) {
              rec.err_state_l2q = discrete_l2q_distance(uf, fine.state, fine.M);
              ControlField zf = transfer_control(data[i].Z, fine.mesh);
              rec.err_control_l2q = discrete_l2q_distance(zf, fine.Z);
            }
          }
        }
      }
    } else {
      // Temporal refinement on one fixed mesh, errors against a reference
      // run with one-eighth the finest step.
      double h = 2.0 / cfg.temporal_mesh_level;
      Mesh mesh;
      SparseSymMatrix Kmat, M;
      bool base_ok = true;
      std::string base_err;
      try {
        mesh = build_mesh(spec.domain, h, cfg.kappa);
        Kmat = fractional_stiffness(mesh, make_kernel_params(mesh.dim, spec.s), cfg.quad);
        M = mass_matrix(mesh);
      } catch (const std::exception& e) {
        base_ok = false;
        base_err = e.what();
        summary << "  mesh/assembly FAILED: " << e.what() << "\n";
      }

      auto solve_at = [&](int K_steps, TimeGrid& grid_out) {
        TimeGrid grid = make_time_grid(cfg.T, K_steps);
        DiscreteProblem dp;
        dp.mesh = &mesh;
        dp.grid = grid;
        dp.mu = spec.mu;
        dp.a = spec.a;
        dp.b = spec.b;
        dp.K = Kmat;
        dp.M = M;
        QuadConfig lq = cfg.quad;
        lq.gauss_order_regular = 6;
        dp.f_traj = time_averaged_load(spec.f, mesh, grid, lq);
        dp.ud_traj = project_tracking_target(spec.u_d, mesh, M, grid, cfg.ud_time_average, lq);
        dp.U0 = l2_project_initial(mesh, M, spec.u0, lq);
        grid_out = grid;
        return solve_control_bfgs(dp, cfg.opt_tol, cfg.opt_max_iter);
      };

      TimeGrid ref_grid;
      ControlSolution ref_sol;
      bool ref_ok = false;
      if (base_ok) {
        try {
          ref_sol = solve_at(8 * cfg.temporal_steps.back(), ref_grid);
          ref_ok = true;
        } catch (const std::exception& e) {
          summary << "  reference solve FAILED: " << e.what() << "\n";
        }
      }

      for (int K_steps : cfg.temporal_steps) {
        ConvergenceRecord rec;
        rec.s = s;
        rec.level = K_steps;
        rec.h = h;
        rec.tau = cfg.T / K_steps;
        auto t0 = std::chrono::steady_clock::now();
        if (!base_ok || !ref_ok) {
          rec.failed = true;
          rec.failure = base_ok ? "no reference solution" : base_err;
          out.records.push_back(rec);
          continue;
        }
        try {
          TimeGrid grid;
          ControlSolution sol = solve_at(K_steps, grid);
          rec.ndofs = mesh.n_dofs();
          rec.opt_converged = sol.report.converged;
          rec.err_state_l2q = discrete_l2q_distance(sol.state, ref_sol.state, M);
          rec.err_state_energy = discrete_l2q_distance(sol.state, ref_sol.state, Kmat);
          rec.err_control_l2q = discrete_l2q_distance(sol.Z, ref_sol.Z);
        } catch (const std::exception& e) {
          rec.failed = true;
          rec.failure = e.what();
          summary << "  K=" << K_steps << " FAILED: " << e.what() << "\n";
        }
        rec.walltime_s = elapsed_s(t0);
        out.records.push_back(rec);
      }
    }

    fill_eoc(out.records, first_rec);

    // Per-s rows, plot curves, and notes.
    std::ostringstream px, pz;
    for (size_t i = first_rec; i < out.records.size(); ++i) {
      const ConvergenceRecord& rec = out.records[i];
      if (rec.failed) {
        csv << "# s=" << fmt(rec.s) << " level=" << rec.level << " failed: " << rec.failure
            << "\n";
        continue;
      }
      csv << csv_row(rec);
      double xkey = cfg.study == StudyKind::spatial ? rec.h : rec.tau;
      px << fmt(xkey) << " " << fmt(rec.err_state_l2q) << "\n";
      pz << fmt(xkey) << " " << fmt(rec.err_control_l2q) << "\n";
      summary << "  level " << rec.level << ": h=" << rec.h << " tau=" << rec.tau
              << " ndofs=" << rec.ndofs << " err_u=" << rec.err_state_l2q
              << " err_z=" << rec.err_control_l2q;
      if (rec.has_eoc) {
        summary << " eoc_u="
                << (rec.eoc_state.below_tolerance ? std::string("below_tol")
                                                  : std::to_string(rec.eoc_state.rate))
                << " eoc_z="
                << (rec.eoc_control.below_tolerance ? std::string("below_tol")
                                                    : std::to_string(rec.eoc_control.rate));
      }
      if (!rec.opt_converged) summary << " [optimizer hit iteration cap]";
      summary << "\n";
    }
    std::ostringstream tag;
    tag << "s" << s;
    out.plot_files.push_back({"state_" + tag.str() + ".dat", px.str()});
    out.plot_files.push_back({"control_" + tag.str() + ".dat", pz.str()});
  }

  out.csv = csv.str();
  out.summary = summary.str();
  return out;
}

}  // namespace fhc
