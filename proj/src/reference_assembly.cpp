#include "fhc/reference_assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fhc/quadrature.hpp"

namespace fhc {

namespace {

// ----------------------------------------------------------------- 1D part

// Piecewise-linear hat of one interior dof: breakpoints with values 0,1,0.
struct Hat1 {
  double xl, xc, xr;
  double operator()(double x) const {
    if (x <= xl || x >= xr) return 0.0;
    return x < xc ? (x - xl) / (xc - xl) : (xr - x) / (xr - xc);
  }
};

Hat1 hat_of_dof_1d(const Mesh& mesh, int dof) {
  int v = mesh.vertex_of_dof[dof];
  double xc = mesh.vertex[v][0];
  double xl = -1e300, xr = 1e300;
  for (const auto& c : mesh.cell) {
    if (c[0] == v) xr = mesh.vertex[c[1]][0];
    if (c[1] == v) xl = mesh.vertex[c[0]][0];
  }
  if (xl < -1e299 || xr > 1e299)
    throw std::logic_error("reference_stiffness: dangling interior vertex");
  return Hat1{xl, xc, xr};
}

// S(t) = integral of (phi_i(x)-phi_i(x+t))(phi_j(x)-phi_j(x+t)) dx, computed
// as exact Gauss-2 sums between the breakpoints of both shifted hats.
double corr_diff_1d(const Hat1& fi, const Hat1& fj, double t) {
  std::array<double, 12> bk{fi.xl, fi.xc, fi.xr,     fj.xl,     fj.xc,
                            fj.xr, fi.xl - t, fi.xc - t, fi.xr - t,
                            fj.xl - t, fj.xc - t, fj.xr - t};
  std::sort(bk.begin(), bk.end());
  const GaussRule& g2 = gauss_legendre(2);
  double acc = 0.0;
  for (size_t p = 0; p + 1 < bk.size(); ++p) {
    double a = bk[p], b = bk[p + 1];
    if (b - a < 1e-300) continue;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (size_t q = 0; q < g2.x.size(); ++q) {
      double x = mid + half * g2.x[q];
      double di = fi(x) - fi(x + t);
      double dj = fj(x) - fj(x + t);
      acc += half * g2.w[q] * di * dj;
    }
  }
  return acc;
}

double overlap_mass_1d(const Hat1& fi, const Hat1& fj) {
  std::array<double, 6> bk{fi.xl, fi.xc, fi.xr, fj.xl, fj.xc, fj.xr};
  std::sort(bk.begin(), bk.end());
  const GaussRule& g2 = gauss_legendre(2);
  double acc = 0.0;
  for (size_t p = 0; p + 1 < bk.size(); ++p) {
    double mid = 0.5 * (bk[p] + bk[p + 1]), half = 0.5 * (bk[p + 1] - bk[p]);
    if (half < 1e-300) continue;
    for (size_t q = 0; q < g2.x.size(); ++q) {
      double x = mid + half * g2.x[q];
      acc += half * g2.w[q] * fi(x) * fj(x);
    }
  }
  return acc;
}

// c_ns * integral_0^inf t^{-1-2s} S(t) dt via: quadratic model on (0,tmin],
// adaptive log-substituted quadrature on [tmin,R], analytic tail beyond R
// where S is the constant 2*(phi_i,phi_j).
double entry_1d(const Mesh& mesh, const KernelParams& kp, int di, int dj) {
  Hat1 fi = hat_of_dof_1d(mesh, di), fj = hat_of_dof_1d(mesh, dj);
  double s = kp.s;
  // Cauchy-Schwarz bound on every correlation value; differences below the
  // roundoff floor of that magnitude are cancellation noise, not signal.
  double floor_v =
      1e-13 * std::sqrt(overlap_mass_1d(fi, fi) * overlap_mass_1d(fj, fj));
  auto damp = [floor_v](double v) { return std::abs(v) < floor_v ? 0.0 : v; };
  double m0 = damp(overlap_mass_1d(fi, fj));
  double R = std::max({fi.xr - fj.xl, fj.xr - fi.xl, 1e-12});
  double hmin = std::min({fi.xc - fi.xl, fi.xr - fi.xc, fj.xc - fj.xl, fj.xr - fj.xc});
  double tmin = 1e-6 * hmin;

  double near0 =
      damp(corr_diff_1d(fi, fj, tmin)) * std::pow(tmin, -2.0 * s) / (2.0 - 2.0 * s);
  double tail = 2.0 * m0 * std::pow(R, -2.0 * s) / (2.0 * s);

  double U = std::log(R / tmin);
  auto f = [&](double u) {
    double t = tmin * std::exp(u);
    return std::pow(t, -2.0 * s) * damp(corr_diff_1d(fi, fj, t));
  };
  // coarse scale estimate, then absolute tolerance from it
  double scale = std::abs(near0) + std::abs(tail);
  {
    const GaussRule& g5 = gauss_legendre(5);
    int panels = 24;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      double a = U * p / panels, b = U * (p + 1) / panels;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (size_t q = 0; q < g5.x.size(); ++q) acc += half * g5.w[q] * f(mid + half * g5.x[q]);
    }
    scale += std::abs(acc);
  }
  double core = adaptive_integrate(f, 0.0, U, 1e-10 * scale + 1e-300, 52);
  return kp.c_ns * (near0 + core + tail);
}

// ----------------------------------------------------------------- 2D part

struct P2 {
  double x, y;
};
P2 operator-(P2 a, P2 b) { return {a.x - b.x, a.y - b.y}; }
double crossz(P2 a, P2 b) { return a.x * b.y - a.y * b.x; }

// One cell of a hat's support with the local affine value alpha + g.x.
struct Patch {
  std::array<P2, 3> v;  // counterclockwise
  double alpha;
  P2 g;
};

struct Hat2 {
  std::vector<Patch> patches;
  double diam_min = 1e300;  // smallest cell diameter in the support
};

Hat2 hat_of_dof_2d(const Mesh& mesh, int dof) {
  int vtx = mesh.vertex_of_dof[dof];
  Hat2 out;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cc = mesh.cell[c];
    int local = -1;
    for (int k = 0; k < 3; ++k)
      if (cc[k] == vtx) local = k;
    if (local < 0) continue;
    P2 A{mesh.vertex[cc[local]][0], mesh.vertex[cc[local]][1]};
    P2 B{mesh.vertex[cc[(local + 1) % 3]][0], mesh.vertex[cc[(local + 1) % 3]][1]};
    P2 C{mesh.vertex[cc[(local + 2) % 3]][0], mesh.vertex[cc[(local + 2) % 3]][1]};
    if (crossz(B - A, C - A) < 0.0) std::swap(B, C);
    P2 u = B - A, w = C - A;
    double D = crossz(u, w);
    P2 g{(u.y - w.y) / D, (w.x - u.x) / D};
    double alpha = 1.0 - (g.x * A.x + g.y * A.y);
    out.patches.push_back(Patch{{A, B, C}, alpha, g});
    out.diam_min = std::min(out.diam_min, mesh.cell_diameter(c));
  }
  if (out.patches.empty())
    throw std::logic_error("reference_stiffness: empty support");
  return out;
}

// Convex clip of `subject` against the counterclockwise triangle `clip`.
int clip_triangle(const std::array<P2, 3>& subject, const std::array<P2, 3>& clip,
                  std::array<P2, 8>& out) {
  std::array<P2, 8> buf;
  int n = 3;
  for (int k = 0; k < 3; ++k) out[k] = subject[k];
  for (int e = 0; e < 3; ++e) {
    P2 a = clip[e], b = clip[(e + 1) % 3];
    P2 dir = b - a;
    int m = 0;
    for (int k = 0; k < n; ++k) {
      P2 p = out[k], q = out[(k + 1) % n];
      double dp = crossz(dir, p - a), dq = crossz(dir, q - a);
      if (dp >= 0.0) buf[m++] = p;
      if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
        double w = dp / (dp - dq);
        buf[m++] = P2{p.x + w * (q.x - p.x), p.y + w * (q.y - p.y)};
      }
    }
    n = m;
    if (n == 0) return 0;
    for (int k = 0; k < n; ++k) out[k] = buf[k];
  }
  return n;
}

// Exact integral of the quadratic (a1 + g1.x)(a2 + g2.(x+t)) over the clip
// polygon: fan triangulation, edge-midpoint rule (degree 2).
double quad_over_polygon(const std::array<P2, 8>& poly, int n, double a1, P2 g1,
                         double a2, P2 g2, P2 t) {
  double b2 = a2 + g2.x * t.x + g2.y * t.y;
  double acc = 0.0;
  for (int k = 1; k + 1 < n; ++k) {
    P2 A = poly[0], B = poly[k], C = poly[k + 1];
    double area2 = crossz(B - A, C - A);
    P2 m0{0.5 * (A.x + B.x), 0.5 * (A.y + B.y)};
    P2 m1{0.5 * (B.x + C.x), 0.5 * (B.y + C.y)};
    P2 m2{0.5 * (C.x + A.x), 0.5 * (C.y + A.y)};
    double sum = 0.0;
    for (P2 m : {m0, m1, m2})
      sum += (a1 + g1.x * m.x + g1.y * m.y) * (b2 + g2.x * m.x + g2.y * m.y);
    acc += 0.5 * area2 * sum / 3.0;
  }
  return acc;
}

// M(t) = integral of phi_i(x) phi_j(x+t) dx.
double cross_corr_2d(const Hat2& fi, const Hat2& fj, P2 t) {
  double acc = 0.0;
  std::array<P2, 8> poly;
  for (const Patch& a : fi.patches)
    for (const Patch& b : fj.patches) {
      std::array<P2, 3> shifted{b.v[0] - t, b.v[1] - t, b.v[2] - t};
      int n = clip_triangle(a.v, shifted, poly);
      if (n >= 3) acc += quad_over_polygon(poly, n, a.alpha, a.g, b.alpha, b.g, t);
    }
  return acc;
}

double entry_2d(const Mesh& mesh, const KernelParams& kp, int di, int dj) {
  Hat2 fi = hat_of_dof_2d(mesh, di), fj = hat_of_dof_2d(mesh, dj);
  double s = kp.s;
  // Same noise floor as in 1D. Supports that touch in a point or an edge
  // produce clipping slivers whose correlations are pure roundoff; left in,
  // they drive the adaptive radial quadrature into full-depth subdivision.
  double floor_v = 1e-13 * std::sqrt(cross_corr_2d(fi, fi, P2{0.0, 0.0}) *
                                     cross_corr_2d(fj, fj, P2{0.0, 0.0}));
  auto damp = [floor_v](double v) { return std::abs(v) < floor_v ? 0.0 : v; };
  double m0 = damp(cross_corr_2d(fi, fj, P2{0.0, 0.0}));
  double R = 1e-12;
  for (const Patch& a : fi.patches)
    for (const Patch& b : fj.patches)
      for (P2 pa : a.v)
        for (P2 pb : b.v) R = std::max(R, std::hypot(pb.x - pa.x, pb.y - pa.y));
  double hmin = std::min(fi.diam_min, fj.diam_min);
  double rmin = 1e-4 * hmin;
  double U = std::log(R / rmin);

  // S(-t) = S(t): integrate theta over a half turn and double.
  auto radial = [&](double theta) {
    P2 dir{std::cos(theta), std::sin(theta)};
    auto S = [&](double r) {
      P2 t{r * dir.x, r * dir.y};
      return damp(2.0 * m0 - cross_corr_2d(fi, fj, t) -
                  cross_corr_2d(fi, fj, P2{-t.x, -t.y}));
    };
    double near0 = S(rmin) * std::pow(rmin, -2.0 * s) / (2.0 - 2.0 * s);
    auto f = [&](double u) {
      double r = rmin * std::exp(u);
      return std::pow(r, -2.0 * s) * S(r);
    };
    const GaussRule& g4 = gauss_legendre(4);
    int panels = 12;
    double coarse = 0.0;
    for (int p = 0; p < panels; ++p) {
      double a = U * p / panels, b = U * (p + 1) / panels;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (size_t q = 0; q < g4.x.size(); ++q)
        coarse += half * g4.w[q] * f(mid + half * g4.x[q]);
    }
    double scale = std::abs(coarse) + std::abs(near0) + std::abs(m0) * std::pow(R, -2.0 * s);
    double core = adaptive_integrate(f, 0.0, U, 3e-8 * scale + 1e-300, 40);
    return near0 + core;
  };

  // Periodic trapezoid with doubling on [0, pi); refinement reuses the
  // previous sum and evaluates only the new odd nodes.
  const double pi = std::numbers::pi;
  int n = 24;
  double cur = 0.0;
  for (int k = 0; k < n; ++k) cur += radial(pi * k / n);
  cur *= pi / n;
  for (int round = 0; round < 4; ++round) {
    double odd = 0.0;
    for (int k = 1; k < 2 * n; k += 2) odd += radial(pi * k / (2 * n));
    double nxt = 0.5 * cur + odd * (pi / (2 * n));
    double diff = std::abs(nxt - cur);
    cur = nxt;
    n *= 2;
    if (diff <= 1e-5 * std::abs(nxt) + 1e-300) break;
  }
  double angular = 2.0 * cur;  // other half turn by symmetry
  double tail = 2.0 * pi * 2.0 * m0 * std::pow(R, -2.0 * s) / (2.0 * s);
  return 0.5 * kp.c_ns * (angular + tail);
}

}  // namespace

double reference_stiffness_entry(const Mesh& mesh, const KernelParams& kp,
                                 int dof_i, int dof_j) {
  if (kp.n != mesh.dim) throw std::invalid_argument("reference_stiffness: dimension mismatch");
  return mesh.dim == 1 ? entry_1d(mesh, kp, dof_i, dof_j)
                       : entry_2d(mesh, kp, dof_i, dof_j);
}

SparseSymMatrix reference_stiffness(const Mesh& mesh, const KernelParams& kp) {
  int nd = mesh.n_dofs();
  SparseBuilder bld(nd);
  for (int i = 0; i < nd; ++i)
    for (int j = i; j < nd; ++j) {
      double v = reference_stiffness_entry(mesh, kp, i, j);
      bld.add(i, j, v);
      if (j != i) bld.add(j, i, v);
    }
  return bld.finalize();
}

}  // namespace fhc
