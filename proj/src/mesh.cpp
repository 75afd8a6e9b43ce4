#include "fhc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fhc {

Domain Domain::interval(double xl, double xr) {
  Domain d;
  d.kind = DomainKind::interval;
  d.xl = xl;
  d.xr = xr;
  return d;
}

Domain Domain::disc(double radius) {
  Domain d;
  d.kind = DomainKind::disc;
  d.radius = radius;
  return d;
}

double Domain::measure() const {
  switch (kind) {
    case DomainKind::interval: return xr - xl;
    case DomainKind::disc: return std::numbers::pi * radius * radius;
    default: throw std::logic_error("Domain::measure: unknown domain");
  }
}

double Mesh::cell_measure(int c) const {
  const auto& cl = cell[c];
  if (dim == 1) return vertex[cl[1]][0] - vertex[cl[0]][0];
  const auto& a = vertex[cl[0]];
  const auto& b = vertex[cl[1]];
  const auto& d = vertex[cl[2]];
  return 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]));
}

double Mesh::cell_diameter(int c) const {
  const auto& cl = cell[c];
  if (dim == 1) return cell_measure(c);
  double dmax = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      double dx = vertex[cl[i]][0] - vertex[cl[j]][0];
      double dy = vertex[cl[i]][1] - vertex[cl[j]][1];
      dmax = std::max(dmax, std::hypot(dx, dy));
    }
  return dmax;
}

namespace {

void finalize_dofs(Mesh& m) {
  m.dof_of_vertex.assign(m.n_vertices(), -1);
  m.vertex_of_dof.clear();
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (!m.on_boundary[v]) {
      m.dof_of_vertex[v] = (int)m.vertex_of_dof.size();
      m.vertex_of_dof.push_back(v);
    }
  }
}

void validate_common(double target_h, double kappa) {
  if (!(target_h > 0.0)) throw std::invalid_argument("build_mesh: target_h must be > 0");
  if (!(kappa >= 1.0 && kappa <= 2.0))
    throw std::invalid_argument("build_mesh: kappa must lie in [1,2]");
}

Mesh build_interval(const Domain& dom, double target_h, double kappa) {
  if (!(dom.xr > dom.xl)) throw std::invalid_argument("build_mesh: degenerate interval");
  const double L = dom.xr - dom.xl;
  long long n = std::llround(L / target_h);
  if (n < 1) throw std::invalid_argument("build_mesh: refinement request yields no cells");
  if (kappa > 1.0 && n % 2 != 0) ++n;  // graded meshes are endpoint-symmetric

  Mesh m;
  m.dim = 1;
  m.domain = dom;
  m.kappa = kappa;
  m.target_h = target_h;
  m.vertex.resize(n + 1);
  if (kappa == 1.0) {
    for (long long i = 0; i <= n; ++i)
      m.vertex[i] = {dom.xl + L * (double)i / (double)n, 0.0};
  } else {
    // Symmetric grading: (i/(n/2))^kappa mapped from each endpoint.
    const long long nh = n / 2;
    for (long long i = 0; i <= nh; ++i) {
      double t = std::pow((double)i / (double)nh, kappa);
      m.vertex[i] = {dom.xl + 0.5 * L * t, 0.0};
      m.vertex[n - i] = {dom.xr - 0.5 * L * t, 0.0};
    }
  }
  m.cell.resize(n);
  for (long long i = 0; i < n; ++i) m.cell[i] = {(int)i, (int)(i + 1), -1};
  m.on_boundary.assign(n + 1, 0);
  m.on_boundary.front() = 1;
  m.on_boundary.back() = 1;
  finalize_dofs(m);
  return m;
}

// Per-ring angular vertex count for the polar disc mesh: 6*2^p with p chosen
// from the ratio of circumference to local radial spacing. The argument
// depends on the ring only through m*G(j/m), so doubling the ring count
// shifts p by exactly one and vertex sets nest across refinement levels.
int ring_count(int m, int j, double kappa) {
  double xi = (double)std::min(j, m - 1) / (double)m;
  double one = 1.0 - xi;
  double R = 1.0 - std::pow(one, kappa);
  double G = 2.0 * std::numbers::pi * R / (kappa * std::pow(one, kappa - 1.0));
  double arg = (double)m * G / 6.0;
  int p = 0;
  if (arg > 1.0) p = (int)std::ceil(std::log2(arg) - 1e-9);
  return 6 * (1 << p);
}

Mesh build_disc(const Domain& dom, double target_h, double kappa) {
  if (!(dom.radius > 0.0)) throw std::invalid_argument("build_mesh: degenerate disc");
  long long m = std::llround(dom.radius / target_h);
  if (m < 1) throw std::invalid_argument("build_mesh: refinement request yields no cells");

  Mesh mesh;
  mesh.dim = 2;
  mesh.domain = dom;
  mesh.kappa = kappa;
  mesh.target_h = target_h;

  mesh.vertex.push_back({0.0, 0.0});  // center
  std::vector<int> ring_first(m + 1, 0), ring_n(m + 1, 0);
  std::vector<int> counts(m + 1, 0);
  for (int j = 1; j <= (int)m; ++j) {
    counts[j] = ring_count((int)m, j, kappa);
    if (j > 1) counts[j] = std::max(counts[j], counts[j - 1]);
  }
  for (int j = 1; j <= (int)m; ++j) {
    double rj = dom.radius * (1.0 - std::pow(1.0 - (double)j / (double)m, kappa));
    if (j == (int)m) rj = dom.radius;  // exact circle
    ring_first[j] = mesh.n_vertices();
    ring_n[j] = counts[j];
    for (int i = 0; i < counts[j]; ++i) {
      double th = 2.0 * std::numbers::pi * (double)i / (double)counts[j];
      mesh.vertex.push_back({rj * std::cos(th), rj * std::sin(th)});
    }
  }

  // Central fan.
  for (int i = 0; i < ring_n[1]; ++i)
    mesh.cell.push_back({0, ring_first[1] + i, ring_first[1] + (i + 1) % ring_n[1]});

  // Annular bands: angle-ordered zigzag between consecutive rings; works for
  // any count pair and stays conforming because vertex angle sets nest.
  for (int j = 1; j < (int)m; ++j) {
    int ni = ring_n[j], no = ring_n[j + 1];
    int fi = ring_first[j], fo = ring_first[j + 1];
    int i = 0, o = 0;
    while (i < ni || o < no) {
      double ai = 2.0 * std::numbers::pi * (double)(i + 1) / (double)ni;
      double ao = 2.0 * std::numbers::pi * (double)(o + 1) / (double)no;
      bool advance_outer = (o < no) && (i >= ni || ao <= ai + 1e-12);
      if (advance_outer) {
        mesh.cell.push_back({fi + i % ni, fo + o % no, fo + (o + 1) % no});
        ++o;
      } else {
        mesh.cell.push_back({fi + i % ni, fo + o % no, fi + (i + 1) % ni});
        ++i;
      }
    }
  }

  mesh.on_boundary.assign(mesh.n_vertices(), 0);
  for (int i = 0; i < ring_n[m]; ++i) mesh.on_boundary[ring_first[m] + i] = 1;
  finalize_dofs(mesh);

  for (int c = 0; c < mesh.n_cells(); ++c)
    if (!(mesh.cell_measure(c) > 0.0))
      throw std::logic_error("build_mesh: non-positive cell orientation");
  return mesh;
}

}  // namespace

Mesh build_mesh(const Domain& domain, double target_h, double kappa) {
  validate_common(target_h, kappa);
  Mesh m;
  switch (domain.kind) {
    case DomainKind::interval: m = build_interval(domain, target_h, kappa); break;
    case DomainKind::disc: m = build_disc(domain, target_h, kappa); break;
    default: throw std::invalid_argument("build_mesh: unknown domain");
  }
  MeshStats st = mesh_stats(m);
  if (st.sigma_max > 10.0)
    throw std::runtime_error("build_mesh: shape parameter exceeds 10, mesh rejected");
  return m;
}

MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats st;
  st.n_vertices = mesh.n_vertices();
  st.n_cells = mesh.n_cells();
  st.n_interior = mesh.n_dofs();
  if (mesh.n_cells() == 0) throw std::invalid_argument("mesh_stats: empty mesh");
  st.h_min = 1e300;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double h = mesh.cell_diameter(c);
    double meas = mesh.cell_measure(c);
    st.h_max = std::max(st.h_max, h);
    st.h_min = std::min(st.h_min, h);
    st.measure_sum += meas;
    double rho;
    if (mesh.dim == 1) {
      rho = h;  // inscribed ball of an interval is the interval
    } else {
      const auto& cl = mesh.cell[c];
      double per = 0.0;
      for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3;
        per += std::hypot(mesh.vertex[cl[i]][0] - mesh.vertex[cl[j]][0],
                          mesh.vertex[cl[i]][1] - mesh.vertex[cl[j]][1]);
      }
      rho = 4.0 * meas / per;  // diameter of the inscribed ball
    }
    st.sigma_max = std::max(st.sigma_max, h / rho);
  }
  return st;
}

std::string serialize_mesh(const Mesh& mesh) {
  std::ostringstream os;
  char buf[64];
  os << "DIM " << mesh.dim << "\n";
  os << "VERTICES " << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertex) {
    std::snprintf(buf, sizeof buf, "%.17g", v[0]);
    os << buf;
    if (mesh.dim == 2) {
      std::snprintf(buf, sizeof buf, "%.17g", v[1]);
      os << " " << buf;
    }
    os << "\n";
  }
  os << "CELLS " << mesh.n_cells() << "\n";
  for (const auto& c : mesh.cell) {
    os << c[0] << " " << c[1];
    if (mesh.dim == 2) os << " " << c[2];
    os << "\n";
  }
  os << "BOUNDARY\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (mesh.on_boundary[v]) os << v << "\n";
  return os.str();
}

Mesh parse_mesh(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  Mesh m;
  if (!(is >> tag) || tag != "DIM") throw std::runtime_error("parse_mesh: expected DIM");
  if (!(is >> m.dim) || (m.dim != 1 && m.dim != 2))
    throw std::runtime_error("parse_mesh: bad dimension");
  int nv = 0, nc = 0;
  if (!(is >> tag >> nv) || tag != "VERTICES")
    throw std::runtime_error("parse_mesh: expected VERTICES");
  m.vertex.resize(nv);
  for (int i = 0; i < nv; ++i) {
    m.vertex[i] = {0.0, 0.0};
    if (!(is >> m.vertex[i][0])) throw std::runtime_error("parse_mesh: bad vertex line");
    if (m.dim == 2 && !(is >> m.vertex[i][1]))
      throw std::runtime_error("parse_mesh: bad vertex line");
  }
  if (!(is >> tag >> nc) || tag != "CELLS")
    throw std::runtime_error("parse_mesh: expected CELLS");
  m.cell.resize(nc);
  for (int i = 0; i < nc; ++i) {
    m.cell[i] = {0, 0, -1};
    if (!(is >> m.cell[i][0] >> m.cell[i][1]))
      throw std::runtime_error("parse_mesh: bad cell line");
    if (m.dim == 2 && !(is >> m.cell[i][2]))
      throw std::runtime_error("parse_mesh: bad cell line");
  }
  if (!(is >> tag) || tag != "BOUNDARY")
    throw std::runtime_error("parse_mesh: expected BOUNDARY");
  m.on_boundary.assign(nv, 0);
  int v;
  while (is >> v) {
    if (v < 0 || v >= nv) throw std::runtime_error("parse_mesh: bad boundary index");
    m.on_boundary[v] = 1;
  }
  finalize_dofs(m);
  return m;
}

}  // namespace fhc
