#include "fhc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fhc/quadrature.hpp"

namespace fhc {

namespace {

// int_K w for one cell, reference weights pre-normalized.
double cell_integral(const Mesh& mesh, int c, const SpatialFn& w, const QuadConfig& qc) {
  if (mesh.dim == 1) {
    double x0 = mesh.vertex[mesh.cell[c][0]][0], x1 = mesh.vertex[mesh.cell[c][1]][0];
    GaussRule r = gauss_on(qc.gauss_order_regular, std::min(x0, x1), std::max(x0, x1));
    double s = 0.0;
    for (size_t q = 0; q < r.x.size(); ++q) s += r.w[q] * w(&r.x[q]);
    return s;
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
  return s * mesh.cell_measure(c);
}

QuadConfig error_quad(QuadConfig qc) {
  // Resolve the continuous factor well: order >= 4 spatially.
  qc.gauss_order_regular = std::max(qc.gauss_order_regular, 6);
  return qc;
}

}  // namespace

double l2q_error(const SpaceTimeFn& w, double w_norm_sq, const Trajectory& W, const Mesh& mesh,
                 const SparseSymMatrix& M, const QuadConfig& qc) {
  if (W.n != mesh.n_dofs() || M.n != W.n)
    throw std::invalid_argument("l2q_error: trajectory does not match mesh/matrix");
  if (W.first > 1) throw std::invalid_argument("l2q_error: trajectory must cover steps 1..K");
  QuadConfig eq = error_quad(qc);
  const TimeGrid& grid = W.grid;
  double tau = grid.tau();
  int n = W.n;
  std::vector<double> Mu(n);
  double acc = w_norm_sq;
  for (int k = 1; k <= grid.K_steps; ++k) {
    const double* u = W.frame(k);
    std::vector<double> uv(u, u + n);
    M.multiply(uv, Mu);
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += uv[i] * Mu[i];
    acc += tau * quad;
    GaussRule tr = gauss_on(3, grid.t(k - 1), grid.t(k));
    for (size_t q = 0; q < tr.x.size(); ++q) {
      double t = tr.x[q];
      std::vector<double> lv = load_vector(
          mesh, [&](const double* x) { return w(t, x); }, eq);
      double cross = 0.0;
      for (int i = 0; i < n; ++i) cross += uv[i] * lv[i];
      acc -= 2.0 * tr.w[q] * cross;
    }
  }
  return std::sqrt(std::max(0.0, acc));
}

double l2q_error(const SpaceTimeFn& w, double w_norm_sq, const ControlField& W,
                 const QuadConfig& qc) {
  W.check();
  QuadConfig eq = error_quad(qc);
  const Mesh& mesh = *W.mesh;
  const TimeGrid& grid = W.grid;
  double tau = grid.tau();
  double acc = w_norm_sq;
  for (int k = 1; k <= grid.K_steps; ++k) {
    for (int c = 0; c < mesh.n_cells(); ++c)
      acc += tau * mesh.cell_measure(c) * W.at(k, c) * W.at(k, c);
    GaussRule tr = gauss_on(3, grid.t(k - 1), grid.t(k));
    for (size_t q = 0; q < tr.x.size(); ++q) {
      double t = tr.x[q];
      for (int c = 0; c < mesh.n_cells(); ++c) {
        double iw = cell_integral(
            mesh, c, [&](const double* x) { return w(t, x); }, eq);
        acc -= 2.0 * tr.w[q] * W.at(k, c) * iw;
      }
    }
  }
  return std::sqrt(std::max(0.0, acc));
}

namespace {

// Walks the union of two uniform step grids over (0, T]; calls back with
// (interval length, frame index in A, frame index in B).
template <class F>
void union_walk(const TimeGrid& ga, const TimeGrid& gb, const F& f) {
  if (std::abs(ga.T - gb.T) > 1e-12 * std::max(1.0, ga.T))
    throw std::invalid_argument("discrete distance: horizons differ");
  int ia = 1, ib = 1;
  double t = 0.0;
  while (ia <= ga.K_steps && ib <= gb.K_steps) {
    double ea = ga.t(ia), eb = gb.t(ib);
    double e = std::min(ea, eb);
    if (e > t) f(e - t, ia, ib);
    t = e;
    double tolr = 1e-12 * ga.T;
    if (ea <= e + tolr) ++ia;
    if (eb <= e + tolr) ++ib;
  }
}

}  // namespace

double discrete_l2q_distance(const Trajectory& A, const Trajectory& B,
                             const SparseSymMatrix& G) {
  if (A.n != B.n || G.n != A.n)
    throw std::invalid_argument("discrete_l2q_distance: shape mismatch");
  int n = A.n;
  std::vector<double> e(n), Ge(n);
  double acc = 0.0;
  union_walk(A.grid, B.grid, [&](double len, int ia, int ib) {
    const double* a = A.frame(ia);
    const double* b = B.frame(ib);
    for (int i = 0; i < n; ++i) e[i] = a[i] - b[i];
    G.multiply(e, Ge);
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += e[i] * Ge[i];
    acc += len * q;
  });
  return std::sqrt(std::max(0.0, acc));
}

double discrete_l2q_distance(const ControlField& A, const ControlField& B) {
  if (A.mesh != B.mesh) throw std::invalid_argument("discrete_l2q_distance: different meshes");
  const Mesh& mesh = *A.mesh;
  double acc = 0.0;
  union_walk(A.grid, B.grid, [&](double len, int ia, int ib) {
    double q = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double d = A.at(ia, c) - B.at(ib, c);
      q += mesh.cell_measure(c) * d * d;
    }
    acc += len * q;
  });
  return std::sqrt(std::max(0.0, acc));
}

namespace {

// P1 evaluation of an interior-dof vector at an arbitrary point: value from
// the cell whose barycentric coordinates are least negative, which inside
// the mesh is the containing cell and outside extends the nearest affine.
double eval_p1(const Mesh& mesh, const std::vector<double>& u, const double* x) {
  if (mesh.dim == 1) {
    double best = -1e300;
    double val = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double x0 = mesh.vertex[mesh.cell[c][0]][0], x1 = mesh.vertex[mesh.cell[c][1]][0];
      double h = x1 - x0;
      double l1 = (x[0] - x0) / h;
      double m = std::min(l1, 1.0 - l1);
      if (m > best) {
        best = m;
        int d0 = mesh.dof_of_vertex[mesh.cell[c][0]], d1 = mesh.dof_of_vertex[mesh.cell[c][1]];
        val = (d0 >= 0 ? u[d0] * (1.0 - l1) : 0.0) + (d1 >= 0 ? u[d1] * l1 : 0.0);
      }
    }
    return val;
  }
  double best = -1e300;
  double val = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double* p0 = mesh.vertex[mesh.cell[c][0]].data();
    const double* p1 = mesh.vertex[mesh.cell[c][1]].data();
    const double* p2 = mesh.vertex[mesh.cell[c][2]].data();
    double d1x = p1[0] - p0[0], d1y = p1[1] - p0[1];
    double d2x = p2[0] - p0[0], d2y = p2[1] - p0[1];
    double den = d1x * d2y - d1y * d2x;
    double rx = x[0] - p0[0], ry = x[1] - p0[1];
    double l1 = (rx * d2y - ry * d2x) / den;
    double l2 = (d1x * ry - d1y * rx) / den;
    double l0 = 1.0 - l1 - l2;
    double m = std::min({l0, l1, l2});
    if (m > best) {
      best = m;
      double l[3] = {l0, l1, l2};
      double v = 0.0;
      for (int i = 0; i < 3; ++i) {
        int d = mesh.dof_of_vertex[mesh.cell[c][i]];
        if (d >= 0) v += u[d] * l[i];
      }
      val = v;
    }
  }
  return val;
}

}  // namespace

std::vector<double> transfer_nodal(const Mesh& coarse, const std::vector<double>& u,
                                   const Mesh& fine) {
  if ((int)u.size() != coarse.n_dofs())
    throw std::invalid_argument("transfer_nodal: coefficient count mismatch");
  std::vector<double> out(fine.n_dofs(), 0.0);
  for (int d = 0; d < fine.n_dofs(); ++d) {
    int v = fine.vertex_of_dof[d];
    out[d] = eval_p1(coarse, u, fine.vertex[v].data());
  }
  return out;
}

Trajectory transfer_trajectory(const Mesh& coarse, const Trajectory& U, const Mesh& fine) {
  Trajectory out = make_trajectory(U.grid, U.first, U.last(), fine.n_dofs());
  for (int k = U.first; k <= U.last(); ++k) {
    const double* f = U.frame(k);
    std::vector<double> uc(f, f + U.n);
    std::vector<double> uf = transfer_nodal(coarse, uc, fine);
    std::copy(uf.begin(), uf.end(), out.frame(k));
  }
  return out;
}

ControlField transfer_control(const ControlField& zc, const Mesh& fine) {
  const Mesh& coarse = *zc.mesh;
  ControlField out = make_control(fine, zc.grid);
  std::vector<int> owner(fine.n_cells(), 0);
  for (int c = 0; c < fine.n_cells(); ++c) {
    double ctr[2] = {0.0, 0.0};
    int nv = fine.dim + 1;
    for (int i = 0; i < nv; ++i)
      for (int d = 0; d < fine.dim; ++d) ctr[d] += fine.vertex[fine.cell[c][i]][d] / nv;
    // containing coarse cell by least-negative barycentric fit
    double best = -1e300;
    for (int cc = 0; cc < coarse.n_cells(); ++cc) {
      double m;
      if (coarse.dim == 1) {
        double x0 = coarse.vertex[coarse.cell[cc][0]][0],
               x1 = coarse.vertex[coarse.cell[cc][1]][0];
        double l1 = (ctr[0] - x0) / (x1 - x0);
        m = std::min(l1, 1.0 - l1);
      } else {
        const double* p0 = coarse.vertex[coarse.cell[cc][0]].data();
        const double* p1 = coarse.vertex[coarse.cell[cc][1]].data();
        const double* p2 = coarse.vertex[coarse.cell[cc][2]].data();
        double d1x = p1[0] - p0[0], d1y = p1[1] - p0[1];
        double d2x = p2[0] - p0[0], d2y = p2[1] - p0[1];
        double den = d1x * d2y - d1y * d2x;
        double rx = ctr[0] - p0[0], ry = ctr[1] - p0[1];
        double l1 = (rx * d2y - ry * d2x) / den;
        double l2 = (d1x * ry - d1y * rx) / den;
        m = std::min({1.0 - l1 - l2, l1, l2});
      }
      if (m > best) {
        best = m;
        owner[c] = cc;
      }
    }
  }
  for (int k = 1; k <= zc.grid.K_steps; ++k)
    for (int c = 0; c < fine.n_cells(); ++c) out.at(k, c) = zc.at(k, owner[c]);
  return out;
}

std::vector<EocEntry> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw std::invalid_argument("eoc: length mismatch");
  for (size_t i = 0; i + 1 < hs.size(); ++i)
    if (!(hs[i] > hs[i + 1])) throw std::invalid_argument("eoc: hs must strictly decrease");
  for (double e : errors)
    if (!(e >= 0.0)) throw std::invalid_argument("eoc: errors must be nonnegative");
  std::vector<EocEntry> out;
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    EocEntry ent;
    if (errors[i] == 0.0 || errors[i + 1] == 0.0) {
      ent.below_tolerance = true;  // converged below tolerance; rate undefined
    } else {
      ent.rate = std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]);
    }
    out.push_back(ent);
  }
  return out;
}

}  // namespace fhc
