#include "fhc/control.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fhc/quadrature.hpp"

namespace fhc {

void ControlField::check() const {
  if (!mesh || grid.K_steps < 1) throw std::logic_error("ControlField: unbound field");
  if (value.size() != (size_t)grid.K_steps * mesh->n_cells())
    throw std::logic_error("ControlField: value count differs from cells x steps");
  for (double v : value)
    if (!std::isfinite(v)) throw std::logic_error("ControlField: non-finite value");
}

ControlField make_control(const Mesh& mesh, const TimeGrid& grid, double init) {
  ControlField z;
  z.mesh = &mesh;
  z.grid = grid;
  z.value.assign((size_t)grid.K_steps * mesh.n_cells(), init);
  return z;
}

double box_project(double v, double a, double b) {
  if (a > b) throw std::invalid_argument("box_project: empty box (a > b)");
  return std::min(b, std::max(a, v));
}

ControlField box_project(const ControlField& z, double a, double b) {
  if (a > b) throw std::invalid_argument("box_project: empty box (a > b)");
  ControlField out = z;
  for (double& v : out.value) v = std::min(b, std::max(a, v));
  return out;
}

namespace {

// Mean of w over cell c, exact for the quadrature degree in use.
double cell_mean(const Mesh& mesh, int c, const SpatialFn& w, const QuadConfig& qc) {
  if (mesh.dim == 1) {
    double x0 = mesh.vertex[mesh.cell[c][0]][0], x1 = mesh.vertex[mesh.cell[c][1]][0];
    GaussRule r = gauss_on(qc.gauss_order_regular, std::min(x0, x1), std::max(x0, x1));
    double s = 0.0;
    for (size_t q = 0; q < r.x.size(); ++q) s += r.w[q] * w(&r.x[q]);
    return s / std::abs(x1 - x0);
  }
  const TriRule& r = tri_rule(qc.gauss_order_regular);
  double s = 0.0;
  for (size_t q = 0; q < r.w.size(); ++q) {
    double x[2] = {0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      x[0] += r.bary[q][i] * mesh.vertex[mesh.cell[c][i]][0];
      x[1] += r.bary[q][i] * mesh.vertex[mesh.cell[c][i]][1];
    }
    s += r.w[q] * w(x);
  }
  return s;  // reference weights sum to one
}

}  // namespace

ControlField project_control(const SpaceTimeFn& w, const Mesh& mesh, const TimeGrid& grid,
                             const QuadConfig& qc) {
  ControlField z = make_control(mesh, grid);
  double tau = grid.tau();
  for (int k = 1; k <= grid.K_steps; ++k) {
    GaussRule tr = gauss_on(3, grid.t(k - 1), grid.t(k));
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double acc = 0.0;
      for (size_t q = 0; q < tr.x.size(); ++q) {
        double t = tr.x[q];
        acc += tr.w[q] * cell_mean(
                             mesh, c, [&](const double* x) { return w(t, x); }, qc);
      }
      z.at(k, c) = acc / tau;
    }
  }
  return z;
}

ControlField project_control(const Trajectory& nodal, const Mesh& mesh, int frame_offset) {
  if (nodal.n != mesh.n_dofs())
    throw std::invalid_argument("project_control: trajectory does not match mesh dofs");
  ControlField z = make_control(mesh, nodal.grid);
  int nv = mesh.dim + 1;
  for (int k = 1; k <= nodal.grid.K_steps; ++k) {
    const double* f = nodal.frame(k + frame_offset);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double s = 0.0;
      for (int i = 0; i < nv; ++i) {
        int d = mesh.dof_of_vertex[mesh.cell[c][i]];
        if (d >= 0) s += f[d];
      }
      z.at(k, c) = s / nv;
    }
  }
  return z;
}

std::vector<double> control_load(const ControlField& z, int step) {
  const Mesh& mesh = *z.mesh;
  std::vector<double> F(mesh.n_dofs(), 0.0);
  int nv = mesh.dim + 1;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double w = z.at(step, c) * mesh.cell_measure(c) / nv;
    for (int i = 0; i < nv; ++i) {
      int d = mesh.dof_of_vertex[mesh.cell[c][i]];
      if (d >= 0) F[d] += w;
    }
  }
  return F;
}

double control_inner(const ControlField& y, const ControlField& z) {
  if (y.mesh != z.mesh || y.grid.K_steps != z.grid.K_steps)
    throw std::invalid_argument("control_inner: mismatched fields");
  const Mesh& mesh = *y.mesh;
  double tau = y.grid.tau();
  double acc = 0.0;
  for (int k = 1; k <= y.grid.K_steps; ++k) {
    double step = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) step += mesh.cell_measure(c) * y.at(k, c) * z.at(k, c);
    acc += tau * step;
  }
  return acc;
}

double control_l2q_norm(const ControlField& z) { return std::sqrt(control_inner(z, z)); }

std::string dump_control(const ControlField& z) {
  std::ostringstream os;
  char buf[64];
  for (int k = 1; k <= z.grid.K_steps; ++k)
    for (int c = 0; c < z.n_cells(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", z.at(k, c));
      os << k << "," << c << "," << buf << "\n";
    }
  return os.str();
}

}  // namespace fhc
