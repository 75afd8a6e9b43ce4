#pragma once
#include <array>
#include <functional>
#include <vector>

namespace fhc {

// Gauss-Legendre rule on [-1,1]; exact for polynomials of degree 2n-1.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes by Newton iteration on P_n; cached per n. n >= 1.
const GaussRule& gauss_legendre(int n);

// Same rule mapped to [a,b].
GaussRule gauss_on(int n, double a, double b);

// Symmetric quadrature rule on the reference triangle, points in barycentric
// coordinates, weights normalized to sum 1 (scale by the physical area).
struct TriRule {
  int degree = 0;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
};

// Smallest tabulated rule with degree >= `degree`. Tabulated degrees go up
// to tri_rule_max_degree(); beyond that an exception names the limit.
const TriRule& tri_rule(int degree);
int tri_rule_max_degree();

// Adaptive Gauss integration of f over [a,b]: bisect while the 15-point
// value on an interval disagrees with the sum over its halves by more than
// the locally apportioned tolerance. Handles kinks; not endpoint blowups.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth = 48);

}  // namespace fhc
