#include "fhc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fhc {

static GaussRule compute_gauss(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  // Newton on P_n with Chebyshev-like initial guesses; symmetric fill.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      double pn1 = (n == 1) ? 1.0 : p0;
      pp = n * (x * pn - pn1) / (x * x - 1.0);
      double dx = pn / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

GaussRule gauss_on(int n, double a, double b) {
  const GaussRule& base = gauss_legendre(n);
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.x[i] = mid + half * base.x[i];
    r.w[i] = half * base.w[i];
  }
  return r;
}

namespace {

void push3(TriRule& r, double a, double w) {
  // permutations of (a, a, 1-2a)
  double c = 1.0 - 2.0 * a;
  r.bary.push_back({c, a, a});
  r.bary.push_back({a, c, a});
  r.bary.push_back({a, a, c});
  r.w.insert(r.w.end(), 3, w);
}

void push6(TriRule& r, double a, double b, double w) {
  double c = 1.0 - a - b;
  r.bary.push_back({a, b, c});
  r.bary.push_back({a, c, b});
  r.bary.push_back({b, a, c});
  r.bary.push_back({b, c, a});
  r.bary.push_back({c, a, b});
  r.bary.push_back({c, b, a});
  r.w.insert(r.w.end(), 6, w);
}

std::vector<TriRule> build_tri_rules() {
  std::vector<TriRule> rules;
  {
    TriRule r;
    r.degree = 1;
    r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.w.push_back(1.0);
    rules.push_back(r);
  }
  {
    TriRule r;
    r.degree = 2;
    push3(r, 1.0 / 6.0, 1.0 / 3.0);
    rules.push_back(r);
  }
  {
    // Dunavant degree 4, 6 points, all weights positive.
    TriRule r;
    r.degree = 4;
    push3(r, 0.445948490915965, 0.223381589678011);
    push3(r, 0.091576213509771, 0.109951743655322);
    rules.push_back(r);
  }
  {
    // Dunavant degree 5, 7 points.
    TriRule r;
    r.degree = 5;
    r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.w.push_back(0.225);
    push3(r, 0.470142064105115, 0.132394152788506);
    push3(r, 0.101286507323456, 0.125939180544827);
    rules.push_back(r);
  }
  {
    // Dunavant degree 6, 12 points.
    TriRule r;
    r.degree = 6;
    push3(r, 0.249286745170910, 0.116786275726379);
    push3(r, 0.063089014491502, 0.050844906370207);
    push6(r, 0.310352451033785, 0.636502499121399, 0.082851075618374);
    rules.push_back(r);
  }
  return rules;
}

}  // namespace

const TriRule& tri_rule(int degree) {
  static const std::vector<TriRule> rules = build_tri_rules();
  for (const TriRule& r : rules)
    if (r.degree >= degree) return r;
  throw std::invalid_argument("tri_rule: no tabulated rule of degree " +
                              std::to_string(degree) + " (max " +
                              std::to_string(tri_rule_max_degree()) + ")");
}

int tri_rule_max_degree() { return 6; }

namespace {

double gauss_apply(const GaussRule& g, const std::function<double(double)>& f, double a,
                   double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + h * g.x[i]);
  return h * s;
}

double adapt_rec(const std::function<double(double)>& f, double a, double b, double whole,
                 double tol, int depth) {
  const GaussRule& g = gauss_legendre(15);
  double m = 0.5 * (a + b);
  double left = gauss_apply(g, f, a, m);
  double right = gauss_apply(g, f, m, b);
  double delta = left + right - whole;
  if (std::abs(delta) <= tol || depth <= 0) return left + right;
  return adapt_rec(f, a, m, left, 0.5 * tol, depth - 1) +
         adapt_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
  if (!(b > a)) return 0.0;
  const GaussRule& g = gauss_legendre(15);
  double whole = gauss_apply(g, f, a, b);
  return adapt_rec(f, a, b, whole, tol, max_depth);
}

}  // namespace fhc
