#include "fhc/timestepping.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fhc/control.hpp"
#include "fhc/quadrature.hpp"

namespace fhc {

namespace {

constexpr double kStepSolveTol = 1e-12;

std::vector<double> step_solve(const SparseSymMatrix& A, const std::vector<double>& rhs,
                               const std::vector<double>& warm, const char* what, int step) {
  auto [x, rep] = cg_solve(A, rhs, kStepSolveTol, 10 * A.n + 200, Precond::jacobi, &warm);
  if (!rep.converged)
    throw std::runtime_error(std::string(what) + " solve failed at step " + std::to_string(step) +
                             ": residual " + std::to_string(rep.relative_residual));
  return x;
}

}  // namespace

TimeGrid make_time_grid(double T, int K_steps) {
  if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
  if (K_steps < 1) throw std::invalid_argument("TimeGrid: need at least one step");
  return TimeGrid{T, K_steps};
}

TimeGrid coupled_time_grid(double T, double h, double gamma) {
  if (!(h > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("coupled_time_grid: h and gamma must be positive");
  double target = std::pow(h, gamma);
  int K = (int)std::ceil(T / target - 1e-12);
  return make_time_grid(T, std::max(1, K));
}

double* Trajectory::frame(int k) {
  if (k < first || k > last()) throw std::out_of_range("Trajectory::frame: index out of range");
  return data.data() + (size_t)(k - first) * n;
}

const double* Trajectory::frame(int k) const {
  if (k < first || k > last()) throw std::out_of_range("Trajectory::frame: index out of range");
  return data.data() + (size_t)(k - first) * n;
}

void Trajectory::check() const {
  if (n <= 0 || data.size() % n != 0) throw std::logic_error("Trajectory: inconsistent shape");
  for (double v : data)
    if (!std::isfinite(v)) throw std::logic_error("Trajectory: non-finite coefficient");
}

Trajectory make_trajectory(const TimeGrid& grid, int first, int last, int n) {
  if (last < first || n <= 0) throw std::invalid_argument("make_trajectory: empty shape");
  Trajectory t;
  t.grid = grid;
  t.first = first;
  t.n = n;
  t.data.assign((size_t)(last - first + 1) * n, 0.0);
  return t;
}

std::vector<double> l2_project_initial(const Mesh& mesh, const SparseSymMatrix& M,
                                       const SpatialFn& u0, const QuadConfig& qc) {
  std::vector<double> b = load_vector(mesh, u0, qc);
  auto [x, rep] = cg_solve(M, b, kStepSolveTol, 10 * M.n + 200, Precond::jacobi);
  if (!rep.converged)
    throw std::runtime_error("initial-data projection solve failed: residual " +
                             std::to_string(rep.relative_residual));
  return x;
}

Trajectory time_averaged_load(const SpaceTimeFn& g, const Mesh& mesh, const TimeGrid& grid,
                              const QuadConfig& qc) {
  Trajectory out = make_trajectory(grid, 1, grid.K_steps, mesh.n_dofs());
  double tau = grid.tau();
  for (int k = 1; k <= grid.K_steps; ++k) {
    GaussRule r = gauss_on(3, grid.t(k - 1), grid.t(k));
    double* f = out.frame(k);
    for (size_t q = 0; q < r.x.size(); ++q) {
      double t = r.x[q];
      std::vector<double> lv = load_vector(
          mesh, [&](const double* x) { return g(t, x); }, qc);
      for (int i = 0; i < out.n; ++i) f[i] += r.w[q] / tau * lv[i];
    }
  }
  out.check();
  return out;
}

Trajectory project_tracking_target(const SpaceTimeFn& ud, const Mesh& mesh,
                                   const SparseSymMatrix& M, const TimeGrid& grid,
                                   bool time_average, const QuadConfig& qc) {
  Trajectory out = make_trajectory(grid, 1, grid.K_steps, mesh.n_dofs());
  double tau = grid.tau();
  std::vector<double> warm(out.n, 0.0);
  for (int k = 1; k <= grid.K_steps; ++k) {
    std::vector<double> b(out.n, 0.0);
    if (time_average) {
      GaussRule r = gauss_on(3, grid.t(k - 1), grid.t(k));
      for (size_t q = 0; q < r.x.size(); ++q) {
        double t = r.x[q];
        std::vector<double> lv = load_vector(
            mesh, [&](const double* x) { return ud(t, x); }, qc);
        for (int i = 0; i < out.n; ++i) b[i] += r.w[q] / tau * lv[i];
      }
    } else {
      double t = grid.t(k);
      b = load_vector(
          mesh, [&](const double* x) { return ud(t, x); }, qc);
    }
    std::vector<double> d = step_solve(M, b, warm, "tracking-target projection", k);
    std::copy(d.begin(), d.end(), out.frame(k));
    warm = std::move(d);
  }
  out.check();
  return out;
}

Trajectory solve_state_forward(const SparseSymMatrix& K, const SparseSymMatrix& M,
                               const Trajectory& f_traj, const ControlField& Z,
                               const std::vector<double>& U0, const TimeGrid& grid) {
  int n = M.n;
  if (K.n != n || (int)U0.size() != n)
    throw std::invalid_argument("solve_state_forward: shape mismatch");
  if (f_traj.n != n || f_traj.first > 1 || f_traj.last() < grid.K_steps)
    throw std::invalid_argument("solve_state_forward: load trajectory does not cover 1..K");
  if (Z.grid.K_steps != grid.K_steps)
    throw std::invalid_argument("solve_state_forward: control step count mismatch");
  double tau = grid.tau();
  SparseSymMatrix A = merged_add(M, 1.0, K, tau);
  Trajectory U = make_trajectory(grid, 0, grid.K_steps, n);
  std::copy(U0.begin(), U0.end(), U.frame(0));
  std::vector<double> prev = U0, Mu(n), rhs(n);
  for (int k = 1; k <= grid.K_steps; ++k) {
    M.multiply(prev, Mu);
    std::vector<double> bz = control_load(Z, k);
    const double* f = f_traj.frame(k);
    for (int i = 0; i < n; ++i) rhs[i] = Mu[i] + tau * (f[i] + bz[i]);
    std::vector<double> u = step_solve(A, rhs, prev, "state", k);
    std::copy(u.begin(), u.end(), U.frame(k));
    prev = std::move(u);
  }
  U.check();
  return U;
}

Trajectory solve_adjoint_backward(const SparseSymMatrix& K, const SparseSymMatrix& M,
                                  const Trajectory& U, const Trajectory& ud_traj,
                                  const TimeGrid& grid) {
  int n = M.n;
  if (K.n != n) throw std::invalid_argument("solve_adjoint_backward: shape mismatch");
  if (U.n != n || U.first > 0 || U.last() < grid.K_steps)
    throw std::invalid_argument("solve_adjoint_backward: state does not cover 0..K");
  if (ud_traj.n != n || ud_traj.first > 1 || ud_traj.last() < grid.K_steps)
    throw std::invalid_argument("solve_adjoint_backward: target does not cover 1..K");
  double tau = grid.tau();
  SparseSymMatrix A = merged_add(M, 1.0, K, tau);
  Trajectory P = make_trajectory(grid, 0, grid.K_steps, n);
  std::vector<double> prev(n, 0.0), w(n), rhs(n);
  for (int k = grid.K_steps - 1; k >= 0; --k) {
    const double* u = U.frame(k + 1);
    const double* d = ud_traj.frame(k + 1);
    for (int i = 0; i < n; ++i) w[i] = prev[i] + tau * (u[i] - d[i]);
    M.multiply(w, rhs);
    std::vector<double> p = step_solve(A, rhs, prev, "adjoint", k);
    std::copy(p.begin(), p.end(), P.frame(k));
    prev = std::move(p);
  }
  P.check();
  return P;
}

std::string dump_trajectory(const Trajectory& traj) {
  std::ostringstream os;
  char buf[64];
  for (int k = traj.first; k <= traj.last(); ++k) {
    os << k;
    std::snprintf(buf, sizeof buf, "%.17g", traj.grid.t(k));
    os << "," << buf;
    const double* f = traj.frame(k);
    for (int i = 0; i < traj.n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", f[i]);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace fhc
