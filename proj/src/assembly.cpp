#include "fhc/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fhc/quadrature.hpp"

namespace fhc {

void QuadConfig::validate(int dim) const {
  if (gauss_order_regular < 1 || gauss_order_singular < 1)
    throw std::invalid_argument("QuadConfig: quadrature orders must be >= 1");
  if (!(near_field_threshold > 0.0))
    throw std::invalid_argument("QuadConfig: near-field threshold must be positive");
  if (dim == 2) {
    int mx = tri_rule_max_degree();
    if (gauss_order_regular > mx || gauss_order_singular > mx)
      throw std::invalid_argument(
          "QuadConfig: quadrature-order underflow, requested order exceeds tabulated triangle "
          "rules (max degree " +
          std::to_string(mx) + ")");
  }
}

namespace {

constexpr int kNearFieldMaxDepth = 4;
constexpr int kChunk = 256;

struct V2 {
  double x = 0.0, y = 0.0;
};
inline V2 operator-(V2 a, V2 b) { return {a.x - b.x, a.y - b.y}; }
inline V2 operator+(V2 a, V2 b) { return {a.x + b.x, a.y + b.y}; }
inline V2 operator*(double c, V2 a) { return {c * a.x, c * a.y}; }
inline double dot(V2 a, V2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(V2 a, V2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(V2 a) { return std::hypot(a.x, a.y); }
inline V2 mid(V2 a, V2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

struct Tri {
  V2 p[3];
  double area() const { return 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0])); }
  double diam() const {
    return std::max({norm(p[1] - p[0]), norm(p[2] - p[1]), norm(p[0] - p[2])});
  }
  V2 pt(double l1, double l2) const {  // barycentric (l0 = 1-l1-l2)
    double l0 = 1.0 - l1 - l2;
    return {l0 * p[0].x + l1 * p[1].x + l2 * p[2].x, l0 * p[0].y + l1 * p[1].y + l2 * p[2].y};
  }
};

// One basis function of a pair job: its affine extension on each side. The
// union basis of a cell pair has at most 6 members in 2D, 4 in 1D.
struct PairBasis {
  int vert = -1;
  double cA = 0.0, cB = 0.0;
  V2 gA, gB;
};

struct LocalAcc {
  int m = 0;
  double v[6][6] = {};
  void add(int i, int j, double val) { v[i][j] += val; }
};

double seg_dist(V2 a, V2 b, V2 c, V2 d) {
  // Distance between segments ab and cd; assumes no proper intersection
  // (disjoint mesh cells), so boundary projections suffice.
  auto pt_seg = [](V2 p, V2 u, V2 v) {
    V2 e = v - u;
    double L2 = dot(e, e);
    double t = L2 > 0.0 ? std::clamp(dot(p - u, e) / L2, 0.0, 1.0) : 0.0;
    return norm(p - (u + t * e));
  };
  double d1 = std::min(pt_seg(a, c, d), pt_seg(b, c, d));
  double d2 = std::min(pt_seg(c, a, b), pt_seg(d, a, b));
  return std::min(d1, d2);
}

double tri_dist(const Tri& A, const Tri& B) {
  double d = 1e300;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      d = std::min(d, seg_dist(A.p[i], A.p[(i + 1) % 3], B.p[j], B.p[(j + 1) % 3]));
  return d;
}

// ---------- 2D pair quadratures ----------
// All routines accumulate int_A int_B Phi_i Phi_j |x-y|^{-2-2s} into acc,
// with Phi_i the difference of the side-A and side-B affine extensions.

void tensor_rule_2d(const Tri& A, const Tri& B, const std::vector<PairBasis>& bs, double s,
                    int degree, LocalAcc& acc) {
  const TriRule& r = tri_rule(degree);
  const int m = (int)bs.size();
  const double scale = A.area() * B.area();
  double phiA[6], phiB[6];
  for (size_t qa = 0; qa < r.w.size(); ++qa) {
    V2 x = A.pt(r.bary[qa][1], r.bary[qa][2]);
    for (int i = 0; i < m; ++i) phiA[i] = bs[i].cA + dot(bs[i].gA, x);
    for (size_t qb = 0; qb < r.w.size(); ++qb) {
      V2 y = B.pt(r.bary[qb][1], r.bary[qb][2]);
      double d2 = dot(x - y, x - y);
      double k = std::pow(d2, -1.0 - s);  // |x-y|^{-2-2s}
      double wk = scale * r.w[qa] * r.w[qb] * k;
      for (int i = 0; i < m; ++i) phiB[i] = phiA[i] - (bs[i].cB + dot(bs[i].gB, y));
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) acc.add(i, j, wk * phiB[i] * phiB[j]);
    }
  }
}

void near_or_far_2d(const Tri& A, const Tri& B, const std::vector<PairBasis>& bs, double s,
                    const QuadConfig& qc, int depth, LocalAcc& acc) {
  double gap = tri_dist(A, B);
  double size = std::max(A.diam(), B.diam());
  if (gap >= qc.near_field_threshold * size) {
    tensor_rule_2d(A, B, bs, s, qc.gauss_order_regular, acc);
    return;
  }
  if (depth >= kNearFieldMaxDepth) {
    tensor_rule_2d(A, B, bs, s, qc.gauss_order_singular, acc);
    return;
  }
  auto children = [](const Tri& T, Tri out[4]) {
    V2 m01 = mid(T.p[0], T.p[1]), m12 = mid(T.p[1], T.p[2]), m20 = mid(T.p[2], T.p[0]);
    out[0] = {{T.p[0], m01, m20}};
    out[1] = {{m01, T.p[1], m12}};
    out[2] = {{m20, m12, T.p[2]}};
    out[3] = {{m01, m12, m20}};
  };
  Tri ca[4], cb[4];
  children(A, ca);
  children(B, cb);
  for (auto& ta : ca)
    for (auto& tb : cb) near_or_far_2d(ta, tb, bs, s, qc, depth + 1, acc);
}

// Shared-vertex pair: both triangles listed with the shared vertex first.
// Cone coordinates about the shared vertex reduce the integral to a smooth
// one over the unit cube; the radial singularity is removed analytically.
void vertex_duffy_2d(const Tri& A, const Tri& B, const std::vector<PairBasis>& bs, double s,
                     int order, LocalAcc& acc) {
  const GaussRule& g = gauss_legendre(order);
  const int m = (int)bs.size();
  V2 p = A.p[0];
  V2 eA1 = A.p[1] - p, eA2 = A.p[2] - p;
  V2 eB1 = B.p[1] - p, eB2 = B.p[2] - p;
  double pref = 4.0 * A.area() * B.area() / (4.0 - 2.0 * s);
  double lu[6], lv[6];
  double sum[6][6] = {};
  for (size_t i2 = 0; i2 < g.x.size(); ++i2) {
    double eta = 0.5 * (g.x[i2] + 1.0), weta = 0.5 * g.w[i2];
    V2 e = (1.0 - eta) * eA1 + eta * eA2;
    for (size_t j2 = 0; j2 < g.x.size(); ++j2) {
      double zeta = 0.5 * (g.x[j2] + 1.0), wzeta = 0.5 * g.w[j2];
      V2 b = (1.0 - zeta) * eB1 + zeta * eB2;
      for (size_t kw = 0; kw < g.x.size(); ++kw) {
        double w = 0.5 * (g.x[kw] + 1.0), ww = 0.5 * g.w[kw];
        double wq = weta * wzeta * ww * w;
        // (U,V) = (1,w) and (w,1) cover the two halves of the square.
        for (int half = 0; half < 2; ++half) {
          V2 u = half == 0 ? e : w * e;
          V2 v = half == 0 ? w * b : b;
          double d2 = dot(u - v, u - v);
          double k = std::pow(d2, -1.0 - s);
          for (int i = 0; i < m; ++i) {
            lu[i] = dot(bs[i].gA, u) - dot(bs[i].gB, v);
            lv[i] = lu[i] * k * wq;
          }
          for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) sum[i][j] += lv[i] * lu[j];
        }
      }
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) acc.add(i, j, pref * sum[i][j]);
}

void edge_pair_2d(const Tri&, const Tri&, V2, V2, const std::vector<PairBasis>&, double,
                  const QuadConfig&, LocalAcc&);

// Reorders t so the shared vertex q comes first; the other two keep order.
Tri about(const Tri& t, V2 q) {
  for (int i = 0; i < 3; ++i)
    if (t.p[i].x == q.x && t.p[i].y == q.y) return {{t.p[i], t.p[(i + 1) % 3], t.p[(i + 2) % 3]}};
  throw std::logic_error("assembly: shared vertex not found");
}

// Identical pair: subdividing into four half-scale children reproduces the
// integral with factor 2^{2s-2}; the remainder couples distinct children
// only (edge- or vertex-adjacent), so I = R / (1 - 2^{2s-2}).
void identical_pair_2d(const Tri& T, const std::vector<PairBasis>& bs, double s,
                       const QuadConfig& qc, LocalAcc& acc) {
  V2 m01 = mid(T.p[0], T.p[1]), m12 = mid(T.p[1], T.p[2]), m20 = mid(T.p[2], T.p[0]);
  Tri c0{{T.p[0], m01, m20}}, c1{{m01, T.p[1], m12}}, c2{{m20, m12, T.p[2]}};
  Tri cm{{m01, m12, m20}};
  LocalAcc r;
  r.m = (int)bs.size();
  vertex_duffy_2d(about(c0, m01), about(c1, m01), bs, s, qc.gauss_order_singular, r);
  vertex_duffy_2d(about(c0, m20), about(c2, m20), bs, s, qc.gauss_order_singular, r);
  vertex_duffy_2d(about(c1, m12), about(c2, m12), bs, s, qc.gauss_order_singular, r);
  edge_pair_2d(cm, c0, m01, m20, bs, s, qc, r);
  edge_pair_2d(cm, c1, m01, m12, bs, s, qc, r);
  edge_pair_2d(cm, c2, m12, m20, bs, s, qc, r);
  // The two orderings of each distinct child pair contribute equally.
  double scale = 2.0 / (1.0 - std::pow(2.0, 2.0 * s - 2.0));
  for (int i = 0; i < r.m; ++i)
    for (int j = i; j < r.m; ++j) acc.add(i, j, scale * r.v[i][j]);
}

// Edge-adjacent pair: the two child pairs flanking the shared edge are
// half-scale copies (factor 2^{2s-4} each); the rest couple through the
// edge midpoint or are separated, so I = R' / (1 - 2^{2s-3}).
void edge_pair_2d(const Tri& A, const Tri& B, V2 p, V2 q, const std::vector<PairBasis>& bs,
                  double s, const QuadConfig& qc, LocalAcc& acc) {
  auto other = [&](const Tri& t) {
    for (int i = 0; i < 3; ++i) {
      bool isp = t.p[i].x == p.x && t.p[i].y == p.y;
      bool isq = t.p[i].x == q.x && t.p[i].y == q.y;
      if (!isp && !isq) return t.p[i];
    }
    throw std::logic_error("assembly: degenerate edge pair");
  };
  V2 rA = other(A), rB = other(B);
  V2 m = mid(p, q);
  V2 maA = mid(p, rA), mbA = mid(q, rA), maB = mid(p, rB), mbB = mid(q, rB);
  Tri Ap{{p, m, maA}}, Aq{{m, q, mbA}}, Aapex{{maA, mbA, rA}}, Am{{m, mbA, maA}};
  Tri Bp{{p, m, maB}}, Bq{{m, q, mbB}}, Bapex{{maB, mbB, rB}}, Bm{{m, mbB, maB}};
  LocalAcc r;
  r.m = (int)bs.size();
  int so = qc.gauss_order_singular;
  vertex_duffy_2d(about(Ap, m), about(Bq, m), bs, s, so, r);
  vertex_duffy_2d(about(Aq, m), about(Bp, m), bs, s, so, r);
  vertex_duffy_2d(about(Ap, m), about(Bm, m), bs, s, so, r);
  vertex_duffy_2d(about(Am, m), about(Bp, m), bs, s, so, r);
  vertex_duffy_2d(about(Am, m), about(Bq, m), bs, s, so, r);
  vertex_duffy_2d(about(Aq, m), about(Bm, m), bs, s, so, r);
  vertex_duffy_2d(about(Am, m), about(Bm, m), bs, s, so, r);
  near_or_far_2d(Aapex, Bp, bs, s, qc, 1, r);
  near_or_far_2d(Aapex, Bq, bs, s, qc, 1, r);
  near_or_far_2d(Aapex, Bm, bs, s, qc, 1, r);
  near_or_far_2d(Aapex, Bapex, bs, s, qc, 1, r);
  near_or_far_2d(Ap, Bapex, bs, s, qc, 1, r);
  near_or_far_2d(Aq, Bapex, bs, s, qc, 1, r);
  near_or_far_2d(Am, Bapex, bs, s, qc, 1, r);
  double scale = 1.0 / (1.0 - std::pow(2.0, 2.0 * s - 3.0));
  for (int i = 0; i < r.m; ++i)
    for (int j = i; j < r.m; ++j) acc.add(i, j, scale * r.v[i][j]);
}

// ---------- 1D pair quadratures ----------

struct Seg {
  double x0 = 0.0, x1 = 0.0;
  double len() const { return x1 - x0; }
};

struct PairBasis1 {
  int vert = -1;
  double cA = 0.0, gA = 0.0, cB = 0.0, gB = 0.0;
};

void tensor_rule_1d(const Seg& A, const Seg& B, const std::vector<PairBasis1>& bs, double s,
                    int order, LocalAcc& acc) {
  GaussRule ga = gauss_on(order, A.x0, A.x1), gb = gauss_on(order, B.x0, B.x1);
  const int m = (int)bs.size();
  double phi[4];
  for (size_t qa = 0; qa < ga.x.size(); ++qa) {
    double x = ga.x[qa];
    for (size_t qb = 0; qb < gb.x.size(); ++qb) {
      double y = gb.x[qb];
      double k = std::pow(std::abs(x - y), -1.0 - 2.0 * s);
      double wk = ga.w[qa] * gb.w[qb] * k;
      for (int i = 0; i < m; ++i)
        phi[i] = (bs[i].cA + bs[i].gA * x) - (bs[i].cB + bs[i].gB * y);
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) acc.add(i, j, wk * phi[i] * phi[j]);
    }
  }
}

void near_or_far_1d(const Seg& A, const Seg& B, const std::vector<PairBasis1>& bs, double s,
                    const QuadConfig& qc, int depth, LocalAcc& acc) {
  double gap = std::max(B.x0 - A.x1, A.x0 - B.x1);
  double size = std::max(A.len(), B.len());
  if (gap >= qc.near_field_threshold * size) {
    tensor_rule_1d(A, B, bs, s, qc.gauss_order_regular, acc);
    return;
  }
  if (depth >= kNearFieldMaxDepth) {
    tensor_rule_1d(A, B, bs, s, qc.gauss_order_singular, acc);
    return;
  }
  double am = 0.5 * (A.x0 + A.x1), bm = 0.5 * (B.x0 + B.x1);
  Seg a0{A.x0, am}, a1{am, A.x1}, b0{B.x0, bm}, b1{bm, B.x1};
  for (const Seg& ca : {a0, a1})
    for (const Seg& cb : {b0, b1}) near_or_far_1d(ca, cb, bs, s, qc, depth + 1, acc);
}

// Identical interval: the affine differences factor through (x-y), leaving
// the closed-form moment of |x-y|^{1-2s} over the square.
void identical_pair_1d(const Seg& A, const std::vector<PairBasis1>& bs, double s, LocalAcc& acc) {
  double h = A.len();
  double base = 2.0 * std::pow(h, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
  const int m = (int)bs.size();
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) acc.add(i, j, base * bs[i].gA * bs[j].gA);
}

// Adjacent intervals sharing A.x1 == B.x0: scaling onto the unit square
// leaves one Gauss integral of a homogeneous integrand per half.
void vertex_pair_1d(const Seg& A, const Seg& B, const std::vector<PairBasis1>& bs, double s,
                    int order, LocalAcc& acc) {
  const GaussRule& g = gauss_legendre(2 * order);
  double hA = A.len(), hB = B.len();
  const int m = (int)bs.size();
  double pref = hA * hB / (3.0 - 2.0 * s);
  double sum[4][4] = {};
  double l[4];
  auto eval = [&](double U, double V, double wq) {
    double k = std::pow(hA * U + hB * V, -1.0 - 2.0 * s);
    for (int i = 0; i < m; ++i) l[i] = bs[i].gA * hA * U + bs[i].gB * hB * V;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) sum[i][j] += wq * k * l[i] * l[j];
  };
  for (size_t kq = 0; kq < g.x.size(); ++kq) {
    double w = 0.5 * (g.x[kq] + 1.0), ww = 0.5 * g.w[kq];
    eval(1.0, w, ww);
    eval(w, 1.0, ww);
  }
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) acc.add(i, j, pref * sum[i][j]);
}

// ---------- complement weight spatial integrals ----------

double tri_apply(const Tri& T, const TriRule& r, const std::function<double(V2)>& f) {
  double s = 0.0;
  for (size_t q = 0; q < r.w.size(); ++q) s += r.w[q] * f(T.pt(r.bary[q][1], r.bary[q][2]));
  return s * T.area();
}

double tri_adaptive(const Tri& T, const std::function<double(V2)>& f, double tol, int depth) {
  double coarse = tri_apply(T, tri_rule(4), f);
  double fine = tri_apply(T, tri_rule(6), f);
  if (std::abs(fine - coarse) <= tol || depth <= 0) return fine;
  // Bisect the longest edge to keep children shape-bounded.
  int e = 0;
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    double L = norm(T.p[(i + 1) % 3] - T.p[i]);
    if (L > best) {
      best = L;
      e = i;
    }
  }
  V2 a = T.p[e], b = T.p[(e + 1) % 3], c = T.p[(e + 2) % 3], mm = mid(a, b);
  Tri t1{{a, mm, c}}, t2{{mm, b, c}};
  return tri_adaptive(t1, f, 0.5 * tol, depth - 1) + tri_adaptive(t2, f, 0.5 * tol, depth - 1);
}

// All six hat-pair integrands of one cell share the weight evaluation, so
// they run through a single adaptive pass with per-component tolerances.
using Pair6 = std::array<double, 6>;
using PairFn = std::function<void(V2, Pair6&)>;

Pair6 tri_apply6(const Tri& T, const TriRule& r, const PairFn& f) {
  Pair6 s{}, tmp;
  for (size_t q = 0; q < r.w.size(); ++q) {
    f(T.pt(r.bary[q][1], r.bary[q][2]), tmp);
    for (int k = 0; k < 6; ++k) s[k] += r.w[q] * tmp[k];
  }
  double A = T.area();
  for (int k = 0; k < 6; ++k) s[k] *= A;
  return s;
}

Pair6 tri_adaptive6(const Tri& T, const PairFn& f, const Pair6& tol, int depth) {
  Pair6 coarse = tri_apply6(T, tri_rule(4), f);
  Pair6 fine = tri_apply6(T, tri_rule(6), f);
  bool ok = true;
  for (int k = 0; k < 6; ++k) ok = ok && std::abs(fine[k] - coarse[k]) <= tol[k];
  if (ok || depth <= 0) return fine;
  int e = 0;
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    double L = norm(T.p[(i + 1) % 3] - T.p[i]);
    if (L > best) {
      best = L;
      e = i;
    }
  }
  V2 a = T.p[e], b = T.p[(e + 1) % 3], c = T.p[(e + 2) % 3], mm = mid(a, b);
  Tri t1{{a, mm, c}}, t2{{mm, b, c}};
  Pair6 half;
  for (int k = 0; k < 6; ++k) half[k] = 0.5 * tol[k];
  Pair6 s1 = tri_adaptive6(t1, f, half, depth - 1);
  Pair6 s2 = tri_adaptive6(t2, f, half, depth - 1);
  for (int k = 0; k < 6; ++k) s1[k] += s2[k];
  return s1;
}

// ---------- deterministic chunked assembly driver ----------

struct Entry {
  int i, j;
  double v;
};

void emit_local(const Mesh& mesh, const std::vector<int>& verts, const LocalAcc& acc,
                double weight, std::vector<Entry>& out) {
  for (int i = 0; i < acc.m; ++i) {
    int di = mesh.dof_of_vertex[verts[i]];
    if (di < 0) continue;
    for (int j = i; j < acc.m; ++j) {
      int dj = mesh.dof_of_vertex[verts[j]];
      if (dj < 0) continue;
      double v = weight * acc.v[i][j];
      if (v == 0.0) continue;
      out.push_back({std::min(di, dj), std::max(di, dj), v});
    }
  }
}

void process_pair_1d(const Mesh& mesh, int a, int b, double s, const QuadConfig& qc,
                     std::vector<Entry>& out) {
  auto seg_of = [&](int c) {
    double u = mesh.vertex[mesh.cell[c][0]][0], v = mesh.vertex[mesh.cell[c][1]][0];
    return Seg{std::min(u, v), std::max(u, v)};
  };
  Seg A = seg_of(a), B = seg_of(b);
  std::vector<int> verts;
  for (int c : {a, b})
    for (int t = 0; t < 2; ++t) verts.push_back(mesh.cell[c][t]);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  std::vector<PairBasis1> bs(verts.size());
  auto hat = [&](int cell, int v, double& cc, double& gg) {
    int v0 = mesh.cell[cell][0], v1 = mesh.cell[cell][1];
    double x0 = mesh.vertex[v0][0], x1 = mesh.vertex[v1][0], h = x1 - x0;
    if (v == v0) {
      gg = -1.0 / h;
      cc = x1 / h;
    } else if (v == v1) {
      gg = 1.0 / h;
      cc = -x0 / h;
    } else {
      gg = 0.0;
      cc = 0.0;
    }
  };
  for (size_t i = 0; i < verts.size(); ++i) {
    bs[i].vert = verts[i];
    hat(a, verts[i], bs[i].cA, bs[i].gA);
    hat(b, verts[i], bs[i].cB, bs[i].gB);
  }
  LocalAcc acc;
  acc.m = (int)bs.size();
  if (a == b) {
    identical_pair_1d(A, bs, s, acc);
    emit_local(mesh, verts, acc, 1.0, out);
    return;
  }
  // Normalize so the first interval lies to the left.
  bool swapped = A.x0 > B.x0;
  if (swapped) {
    std::swap(A, B);
    for (auto& f : bs) {
      std::swap(f.cA, f.cB);
      std::swap(f.gA, f.gB);
    }
  }
  if (A.x1 == B.x0)
    vertex_pair_1d(A, B, bs, s, qc.gauss_order_singular, acc);
  else
    near_or_far_1d(A, B, bs, s, qc, 0, acc);
  emit_local(mesh, verts, acc, 2.0, out);
}

void process_pair_2d(const Mesh& mesh, int a, int b, double s, const QuadConfig& qc,
                     std::vector<Entry>& out) {
  auto tri_of = [&](int c) {
    Tri t;
    for (int i = 0; i < 3; ++i)
      t.p[i] = {mesh.vertex[mesh.cell[c][i]][0], mesh.vertex[mesh.cell[c][i]][1]};
    return t;
  };
  Tri A = tri_of(a), B = tri_of(b);
  std::vector<int> verts;
  for (int c : {a, b})
    for (int t = 0; t < 3; ++t) verts.push_back(mesh.cell[c][t]);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  std::vector<PairBasis> bs(verts.size());
  auto hat = [&](int cell, int v, double& cc, V2& gg) {
    int i0 = mesh.cell[cell][0], i1 = mesh.cell[cell][1], i2 = mesh.cell[cell][2];
    if (v != i0 && v != i1 && v != i2) {
      cc = 0.0;
      gg = {0.0, 0.0};
      return;
    }
    V2 p0{mesh.vertex[i0][0], mesh.vertex[i0][1]};
    V2 p1{mesh.vertex[i1][0], mesh.vertex[i1][1]};
    V2 p2{mesh.vertex[i2][0], mesh.vertex[i2][1]};
    V2 pv, pa, pb;
    if (v == i0) {
      pv = p0;
      pa = p1;
      pb = p2;
    } else if (v == i1) {
      pv = p1;
      pa = p2;
      pb = p0;
    } else {
      pv = p2;
      pa = p0;
      pb = p1;
    }
    double den = cross(pa - pv, pb - pv);
    // gradient of the hat that is 1 at pv, 0 along edge (pa, pb)
    gg = {(pa.y - pb.y) / den, (pb.x - pa.x) / den};
    cc = 1.0 - dot(gg, pv);
  };
  for (size_t i = 0; i < verts.size(); ++i) {
    bs[i].vert = verts[i];
    hat(a, verts[i], bs[i].cA, bs[i].gA);
    hat(b, verts[i], bs[i].cB, bs[i].gB);
  }
  LocalAcc acc;
  acc.m = (int)bs.size();
  if (a == b) {
    identical_pair_2d(A, bs, s, qc, acc);
    emit_local(mesh, verts, acc, 1.0, out);
    return;
  }
  // Shared vertices, by global id.
  std::vector<int> shared;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (mesh.cell[a][i] == mesh.cell[b][j]) shared.push_back(mesh.cell[a][i]);
  if (shared.size() == 2) {
    V2 p{mesh.vertex[shared[0]][0], mesh.vertex[shared[0]][1]};
    V2 q{mesh.vertex[shared[1]][0], mesh.vertex[shared[1]][1]};
    edge_pair_2d(A, B, p, q, bs, s, qc, acc);
  } else if (shared.size() == 1) {
    V2 p{mesh.vertex[shared[0]][0], mesh.vertex[shared[0]][1]};
    vertex_duffy_2d(about(A, p), about(B, p), bs, s, qc.gauss_order_singular, acc);
  } else {
    near_or_far_2d(A, B, bs, s, qc, 0, acc);
  }
  emit_local(mesh, verts, acc, 2.0, out);
}

int worker_count() {
  if (const char* env = std::getenv("FHC_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : (int)hc;
}

}  // namespace

SparseSymMatrix fractional_stiffness(const Mesh& mesh, const KernelParams& kp,
                                     const QuadConfig& qc) {
  qc.validate(mesh.dim);
  if (kp.n != mesh.dim)
    throw std::invalid_argument("fractional_stiffness: kernel dimension differs from mesh");
  if (!(kp.s > 0.0 && kp.s < 1.0))
    throw std::invalid_argument("fractional_stiffness: s must lie in (0,1)");
  if (std::abs(kp.c_ns - kernel_constant(kp.n, kp.s)) > 1e-12 * kernel_constant(kp.n, kp.s))
    throw std::invalid_argument("fractional_stiffness: inconsistent kernel constant");
  const double s = kp.s;
  const int nd = mesh.n_dofs();
  const int nc = mesh.n_cells();

  std::vector<std::pair<int, int>> jobs;
  jobs.reserve((size_t)nc * (nc + 1) / 2);
  for (int a = 0; a < nc; ++a)
    for (int b = a; b < nc; ++b) jobs.push_back({a, b});

  // Upper-triangle packed accumulator; chunk results are merged in chunk
  // order so the summation order never depends on the worker count.
  std::vector<double> acc((size_t)nd * (nd + 1) / 2, 0.0);
  auto at = [nd](int i, int j) -> size_t {
    return (size_t)i * nd - (size_t)i * (i - 1) / 2 + (j - i);
  };

  size_t nchunks = (jobs.size() + kChunk - 1) / kChunk;
  auto run_chunk = [&](size_t ci) {
    std::vector<Entry> out;
    size_t lo = ci * kChunk, hi = std::min(jobs.size(), lo + kChunk);
    for (size_t t = lo; t < hi; ++t) {
      if (mesh.dim == 1)
        process_pair_1d(mesh, jobs[t].first, jobs[t].second, s, qc, out);
      else
        process_pair_2d(mesh, jobs[t].first, jobs[t].second, s, qc, out);
    }
    return out;
  };

  int W = worker_count();
  for (size_t base = 0; base < nchunks; base += W) {
    size_t wave = std::min((size_t)W, nchunks - base);
    std::vector<std::future<std::vector<Entry>>> futs;
    for (size_t k = 1; k < wave; ++k)
      futs.push_back(std::async(std::launch::async, run_chunk, base + k));
    std::vector<std::vector<Entry>> results(wave);
    results[0] = run_chunk(base);
    for (size_t k = 1; k < wave; ++k) results[k] = futs[k - 1].get();
    for (size_t k = 0; k < wave; ++k)
      for (const Entry& e : results[k]) acc[at(e.i, e.j)] += e.v;
  }
  double half_c = 0.5 * kp.c_ns;
  for (double& v : acc) v *= half_c;

  // Complement correction: weighted mass integrals with the exact kernel
  // mass of the domain complement as weight. Discrete functions vanish
  // outside the mesh polygon, so in 2D the weight integrates over the
  // polygon complement rather than the ideal disc.
  std::vector<std::array<double, 2>> boundary_loop;
  if (mesh.dim == 2) {
    double cx = 0.0, cy = 0.0;
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (mesh.on_boundary[v]) boundary_loop.push_back(mesh.vertex[v]);
    if (boundary_loop.size() < 3)
      throw std::logic_error("fractional_stiffness: boundary loop missing");
    for (const auto& p : boundary_loop) {
      cx += p[0];
      cy += p[1];
    }
    cx /= (double)boundary_loop.size();
    cy /= (double)boundary_loop.size();
    std::sort(boundary_loop.begin(), boundary_loop.end(),
              [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
                return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(b[1] - cy, b[0] - cx);
              });
  }
  for (int c = 0; c < nc; ++c) {
    if (mesh.dim == 1) {
      int v0 = mesh.cell[c][0], v1 = mesh.cell[c][1];
      double x0 = mesh.vertex[v0][0], x1 = mesh.vertex[v1][0], h = x1 - x0;
      int dv[2] = {mesh.dof_of_vertex[v0], mesh.dof_of_vertex[v1]};
      for (int i = 0; i < 2; ++i) {
        if (dv[i] < 0) continue;
        for (int j = i; j < 2; ++j) {
          if (dv[j] < 0) continue;
          auto f = [&](double x) {
            double li = i == 0 ? (x1 - x) / h : (x - x0) / h;
            double lj = j == 0 ? (x1 - x) / h : (x - x0) / h;
            return li * lj * complement_weight(&x, mesh.domain, kp);
          };
          GaussRule r8 = gauss_on(8, x0, x1);
          double est = 0.0;
          for (size_t q = 0; q < r8.x.size(); ++q) est += r8.w[q] * f(r8.x[q]);
          double val = adaptive_integrate(f, x0, x1, 1e-10 * std::abs(est) + 1e-15, 40);
          acc[at(std::min(dv[i], dv[j]), std::max(dv[i], dv[j]))] += kp.c_ns * val;
        }
      }
    } else {
      Tri T;
      int vid[3];
      for (int i = 0; i < 3; ++i) {
        vid[i] = mesh.cell[c][i];
        T.p[i] = {mesh.vertex[vid[i]][0], mesh.vertex[vid[i]][1]};
      }
      int dv[3];
      bool any = false;
      for (int i = 0; i < 3; ++i) {
        dv[i] = mesh.dof_of_vertex[vid[i]];
        any = any || dv[i] >= 0;
      }
      if (!any) continue;
      auto f6 = [&](V2 x, Pair6& out) {
        // hat values via barycentric solve, one weight call for all pairs
        double l[3];
        V2 d1 = T.p[1] - T.p[0], d2 = T.p[2] - T.p[0], dx = x - T.p[0];
        double den = cross(d1, d2);
        l[1] = cross(dx, d2) / den;
        l[2] = cross(d1, dx) / den;
        l[0] = 1.0 - l[1] - l[2];
        double xv[2] = {x.x, x.y};
        double rho = complement_weight_polygon(xv, boundary_loop, kp);
        int t = 0;
        for (int i = 0; i < 3; ++i)
          for (int j = i; j < 3; ++j) out[t++] = l[i] * l[j] * rho;
      };
      Pair6 scale = tri_apply6(T, tri_rule(2), f6);
      Pair6 tol;
      {
        int t = 0;
        for (int i = 0; i < 3; ++i)
          for (int j = i; j < 3; ++j, ++t)
            // pairs without dofs never drive refinement
            tol[t] = (dv[i] >= 0 && dv[j] >= 0)
                         ? 1e-7 * std::abs(scale[t]) + 1e-13
                         : std::numeric_limits<double>::infinity();
      }
      Pair6 val = tri_adaptive6(T, f6, tol, 24);
      int t = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j, ++t) {
          if (dv[i] < 0 || dv[j] < 0) continue;
          acc[at(std::min(dv[i], dv[j]), std::max(dv[i], dv[j]))] += kp.c_ns * val[t];
        }
    }
  }

  // Pack into CSR with the full symmetric pattern.
  SparseSymMatrix K;
  K.n = nd;
  K.row_ptr.assign(nd + 1, 0);
  std::vector<std::vector<std::pair<int, double>>> rows(nd);
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < nd; ++j) {
      double v = j >= i ? acc[at(i, j)] : acc[at(j, i)];
      if (v != 0.0 || i == j) rows[i].push_back({j, v});
    }
  }
  for (int i = 0; i < nd; ++i) {
    K.row_ptr[i + 1] = K.row_ptr[i] + (int)rows[i].size();
    for (auto& [j, v] : rows[i]) {
      K.col_idx.push_back(j);
      K.value.push_back(v);
    }
  }
  K.check_invariants();
  return K;
}

SparseSymMatrix mass_matrix(const Mesh& mesh, bool include_boundary) {
  int n = include_boundary ? mesh.n_vertices() : mesh.n_dofs();
  auto idx = [&](int v) { return include_boundary ? v : mesh.dof_of_vertex[v]; };
  SparseBuilder b(n);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double meas = mesh.cell_measure(c);
    int nv = mesh.dim + 1;
    for (int i = 0; i < nv; ++i) {
      int di = idx(mesh.cell[c][i]);
      if (di < 0) continue;
      for (int j = 0; j < nv; ++j) {
        int dj = idx(mesh.cell[c][j]);
        if (dj < 0) continue;
        double v;
        if (mesh.dim == 1)
          v = i == j ? meas / 3.0 : meas / 6.0;
        else
          v = i == j ? meas / 6.0 : meas / 12.0;
        b.add(di, dj, v);
      }
    }
  }
  return b.finalize();
}

std::vector<double> load_vector(const Mesh& mesh, const SpatialFn& g, const QuadConfig& qc) {
  qc.validate(mesh.dim);
  std::vector<double> F(mesh.n_dofs(), 0.0);
  if (mesh.dim == 1) {
    for (int c = 0; c < mesh.n_cells(); ++c) {
      int v0 = mesh.cell[c][0], v1 = mesh.cell[c][1];
      double x0 = mesh.vertex[v0][0], x1 = mesh.vertex[v1][0], h = x1 - x0;
      GaussRule r = gauss_on(qc.gauss_order_regular, x0, x1);
      for (size_t q = 0; q < r.x.size(); ++q) {
        double gv = g(&r.x[q]);
        double l1 = (r.x[q] - x0) / h;
        int d0 = mesh.dof_of_vertex[v0], d1 = mesh.dof_of_vertex[v1];
        if (d0 >= 0) F[d0] += r.w[q] * gv * (1.0 - l1);
        if (d1 >= 0) F[d1] += r.w[q] * gv * l1;
      }
    }
  } else {
    const TriRule& r = tri_rule(qc.gauss_order_regular);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      double meas = mesh.cell_measure(c);
      for (size_t q = 0; q < r.w.size(); ++q) {
        double xq[2] = {0.0, 0.0};
        for (int i = 0; i < 3; ++i) {
          xq[0] += r.bary[q][i] * mesh.vertex[mesh.cell[c][i]][0];
          xq[1] += r.bary[q][i] * mesh.vertex[mesh.cell[c][i]][1];
        }
        double gv = g(xq);
        for (int i = 0; i < 3; ++i) {
          int d = mesh.dof_of_vertex[mesh.cell[c][i]];
          if (d >= 0) F[d] += meas * r.w[q] * gv * r.bary[q][i];
        }
      }
    }
  }
  return F;
}

std::string dump_coordinate(const SparseSymMatrix& A) {
  std::ostringstream os;
  char buf[64];
  for (int i = 0; i < A.n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", A.value[k]);
      os << i << " " << A.col_idx[k] << " " << buf << "\n";
    }
  return os.str();
}

}  // namespace fhc
