#include "fhc/checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fhc/control.hpp"
#include "fhc/exact.hpp"
#include "fhc/optimize.hpp"
#include "fhc/quadrature.hpp"
#include "fhc/reference_assembly.hpp"
#include "fhc/timestepping.hpp"

namespace fhc {

namespace {

TimeProfile paper_profile(double T) {
  return make_time_profile([](double t) { return std::cos(t); },
                           [](double t) { return -std::sin(t); },
                           [T](double t) { return std::sin(T - t); },
                           [T](double t) { return -std::cos(T - t); }, T);
}

CheckResult oracle_compare(const std::string& name, const Mesh& mesh, double s,
                           const QuadConfig& qc, double bound) {
  KernelParams kp = make_kernel_params(mesh.dim, s);
  SparseSymMatrix K = fractional_stiffness(mesh, kp, qc);
  int nd = mesh.n_dofs();
  double maxabs = 0.0;
  std::vector<double> oracle((size_t)nd * nd, 0.0);
  for (int i = 0; i < nd; ++i)
    for (int j = i; j < nd; ++j) {
      double v = reference_stiffness_entry(mesh, kp, i, j);
      oracle[(size_t)i * nd + j] = v;
      maxabs = std::max(maxabs, std::abs(v));
    }
  CheckResult r;
  r.name = name;
  r.bound = bound;
  int wi = 0, wj = 0;
  for (int i = 0; i < nd; ++i)
    for (int j = i; j < nd; ++j) {
      double o = oracle[(size_t)i * nd + j];
      double rel = std::abs(K.at(i, j) - o) / std::max(std::abs(o), 1e-12 * maxabs);
      if (rel > r.worst) {
        r.worst = rel;
        wi = i;
        wj = j;
      }
    }
  r.pass = r.worst <= bound;
  std::ostringstream d;
  d << nd << " dofs, worst entry (" << wi << "," << wj << ")";
  r.detail = d.str();
  return r;
}

}  // namespace

CheckResult check_oracle_1d(double s, int cells, const QuadConfig& qc) {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 2.0 / cells, 1.0);
  std::ostringstream name;
  name << "oracle-1d s=" << s << " cells=" << cells;
  return oracle_compare(name.str(), mesh, s, qc, 1e-4);
}

CheckResult check_oracle_2d(double s, const QuadConfig& qc) {
  Mesh mesh = build_mesh(Domain::disc(1.0), 1.0, 1.0);  // 6-cell fan
  std::ostringstream name;
  name << "oracle-2d s=" << s << " cells=" << mesh.n_cells();
  return oracle_compare(name.str(), mesh, s, qc, 1e-3);
}

CheckResult check_gradient_fd(double s, int n_cells, int n_steps, int n_pairs,
                              unsigned seed) {
  SpatialPair up = spatial_pair_1d(0, 0, s);
  auto [spec, triple] = build_manufactured(s, 0.1, -0.5, 0.5, 1.0, up, up,
                                           paper_profile(1.0),
                                           Domain::interval(-1.0, 1.0));
  (void)triple;
  Mesh mesh = build_mesh(spec.domain, 2.0 / n_cells, 1.0);
  TimeGrid grid = make_time_grid(spec.T, n_steps);
  DiscreteProblem dp = build_discrete_problem(spec, mesh, grid);

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  CheckResult r;
  std::ostringstream name;
  name << "gradient-fd s=" << s;
  r.name = name.str();
  r.bound = 1e-6;
  const double eps = 1e-3;
  for (int p = 0; p < n_pairs; ++p) {
    ControlField Z = make_control(mesh, grid);
    ControlField dZ = make_control(mesh, grid);
    for (double& v : Z.value) v = unit(rng);
    for (double& v : dZ.value) v = unit(rng);
    ControlField G = reduced_gradient(Z, dp);
    double dJ = control_inner(G, dZ);
    ControlField Zp = Z, Zm = Z;
    for (size_t k = 0; k < Z.value.size(); ++k) {
      Zp.value[k] += eps * dZ.value[k];
      Zm.value[k] -= eps * dZ.value[k];
    }
    double Jp = reduced_objective(Zp, dp).total;
    double Jm = reduced_objective(Zm, dp).total;
    double fd = (Jp - Jm) / (2.0 * eps);
    double rel = std::abs(fd - dJ) / std::max(std::abs(dJ), 1e-12 * (1.0 + std::abs(Jp)));
    r.worst = std::max(r.worst, rel);
  }
  r.pass = r.worst <= r.bound;
  std::ostringstream d;
  d << n_pairs << " pairs, mesh " << n_cells << "x" << n_steps;
  r.detail = d.str();
  return r;
}

CheckResult check_duality(int n_cells, int n_steps, unsigned seed) {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 2.0 / n_cells, 1.0);
  TimeGrid grid = make_time_grid(1.0, n_steps);
  KernelParams kp = make_kernel_params(1, 0.6);
  QuadConfig qc;
  SparseSymMatrix K = fractional_stiffness(mesh, kp, qc);
  SparseSymMatrix M = mass_matrix(mesh);
  int nd = mesh.n_dofs();

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto rand_traj = [&](int first) {
    Trajectory t = make_trajectory(grid, first, grid.K_steps, nd);
    for (double& v : t.data) v = unit(rng);
    return t;
  };
  Trajectory f = rand_traj(1);
  Trajectory D = rand_traj(1);
  std::vector<double> U0(nd);
  for (double& v : U0) v = unit(rng);
  ControlField Z = make_control(mesh, grid);
  for (double& v : Z.value) v = unit(rng);
  ControlField W = make_control(mesh, grid);
  for (double& v : W.value) v = unit(rng);

  Trajectory U = solve_state_forward(K, M, f, Z, U0, grid);
  Trajectory P = solve_adjoint_backward(K, M, U, D, grid);
  Trajectory zero = make_trajectory(grid, 1, grid.K_steps, nd);
  Trajectory V = solve_state_forward(K, M, zero, W, std::vector<double>(nd, 0.0), grid);

  double tau = grid.tau();
  double lhs = 0.0, rhs = 0.0;
  for (int k = 1; k <= grid.K_steps; ++k) {
    const double* u = U.frame(k);
    const double* d = D.frame(k);
    std::vector<double> g(nd), mg(nd);
    for (int i = 0; i < nd; ++i) g[i] = u[i] - d[i];
    M.multiply(g, mg);
    const double* v = V.frame(k);
    for (int i = 0; i < nd; ++i) lhs += tau * mg[i] * v[i];
    std::vector<double> bw = control_load(W, k);
    const double* p = P.frame(k - 1);
    for (int i = 0; i < nd; ++i) rhs += tau * bw[i] * p[i];
  }
  CheckResult r;
  r.name = "duality";
  r.bound = 1e-8;
  r.worst = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  r.pass = r.worst <= r.bound;
  std::ostringstream d;
  d << "lhs=" << lhs << " rhs=" << rhs;
  r.detail = d.str();
  return r;
}

CheckResult check_projection(unsigned seed) {
  Mesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 2.0 / 16, 1.0);
  TimeGrid grid = make_time_grid(1.0, 8);
  SpaceTimeFn w = [](double t, const double* x) {
    return std::sin(3.0 * t + 1.0) * std::cos(2.0 * x[0]) + 0.3 * x[0];
  };
  ControlField Pw = project_control(w, mesh, grid, QuadConfig{});

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ControlField q = make_control(mesh, grid);
  for (double& v : q.value) v = unit(rng);

  // <w - Pw, q> over Q with dense Gauss in both variables
  const GaussRule& gt = gauss_legendre(6);
  const GaussRule& gx = gauss_legendre(6);
  double inner_w = 0.0;
  for (int k = 1; k <= grid.K_steps; ++k) {
    double t0 = grid.t(k - 1), t1 = grid.t(k);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double x0 = mesh.vertex[mesh.cell[c][0]][0];
      double x1 = mesh.vertex[mesh.cell[c][1]][0];
      double cell_int = 0.0;
      for (size_t a = 0; a < gt.x.size(); ++a) {
        double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gt.x[a];
        for (size_t b = 0; b < gx.x.size(); ++b) {
          double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx.x[b];
          cell_int += 0.25 * (t1 - t0) * (x1 - x0) * gt.w[a] * gx.w[b] * w(t, &x);
        }
      }
      inner_w += q.at(k, c) * cell_int;
    }
  }
  double inner_p = control_inner(Pw, q);
  CheckResult r;
  r.name = "projection";
  // orthogonality holds up to the projection's own quadrature truncation
  r.bound = 1e-6;
  r.worst = std::abs(inner_w - inner_p) / std::max(std::abs(inner_w), 1e-12);

  // box projection is idempotent and monotone on a sample
  double idem = 0.0;
  for (int i = 0; i < 100; ++i) {
    double v = 3.0 * unit(rng);
    double p1 = box_project(v, -0.5, 0.5);
    idem = std::max(idem, std::abs(box_project(p1, -0.5, 0.5) - p1));
  }
  r.worst = std::max(r.worst, idem);
  r.pass = r.worst <= r.bound;
  r.detail = "cell-mean orthogonality + idempotence";
  return r;
}

std::vector<CheckResult> run_check_suites(unsigned seed) {
  std::vector<CheckResult> out;
  out.push_back(check_oracle_1d(0.25, 8));
  out.push_back(check_oracle_1d(0.5, 8));
  out.push_back(check_oracle_1d(0.75, 8));
  out.push_back(check_oracle_2d(0.5));
  out.push_back(check_gradient_fd(0.25, 32, 16, 3, seed));
  out.push_back(check_gradient_fd(0.75, 32, 16, 3, seed + 1));
  out.push_back(check_duality(32, 16, seed + 2));
  out.push_back(check_projection(seed + 3));
  return out;
}

std::string format_check_line(const CheckResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  worst=" << r.worst
     << " bound=" << r.bound;
  if (!r.detail.empty()) os << "  (" << r.detail << ")";
  return os.str();
}

}  // namespace fhc
