#include "fhc/kernel.hpp"

#include <cmath>

#include "fhc/quadrature.hpp"
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fhc {

double kernel_constant(int n, double s) {
  if (n != 1 && n != 2) throw std::invalid_argument("kernel_constant: dimension must be 1 or 2");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("kernel_constant: s must lie in (0,1)");
  double lg = 2.0 * s * std::numbers::ln2 + std::lgamma(s + 0.5 * n) -
              0.5 * n * std::log(std::numbers::pi) - std::lgamma(1.0 - s);
  return s * std::exp(lg);
}

KernelParams make_kernel_params(int n, double s) {
  KernelParams kp;
  kp.n = n;
  kp.s = s;
  kp.c_ns = kernel_constant(n, s);
  return kp;
}

namespace {

double disc_exit_distance(double r, double R, double cth) {
  // Distance from a point at radius r to the circle |y|=R along a ray whose
  // angle with the outward radial direction has cosine cth.
  return -r * cth + std::sqrt(R * R - r * r * (1.0 - cth * cth));
}

double disc_weight(double r, double R, double s) {
  // rho = (1/(2s)) * int_0^{2pi} d(theta)^{-2s} dtheta; smooth periodic
  // integrand, so the doubling trapezoid rule converges fast.
  auto f = [&](double th) {
    return std::pow(disc_exit_distance(r, R, std::cos(th)), -2.0 * s);
  };
  int n = 16;
  double two_pi = 2.0 * std::numbers::pi;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += f(two_pi * k / n);
  double prev = two_pi * sum / n;
  for (int round = 0; round < 18; ++round) {
    for (int k = 0; k < n; ++k) sum += f(two_pi * (k + 0.5) / n);
    n *= 2;
    double cur = two_pi * sum / n;
    if (std::abs(cur - prev) <= 1e-8 * std::abs(cur)) return cur / (2.0 * s);
    prev = cur;
  }
  throw std::runtime_error("complement_weight: angular quadrature failed to converge");
}

}  // namespace

double complement_weight_polygon(const double* x,
                                 const std::vector<std::array<double, 2>>& loop,
                                 const KernelParams& kp) {
  // Sum over boundary edges of the angular wedge integral
  //   int d(theta)^{-2s} dtheta,  d(theta) = p / cos(theta - alpha),
  // with p the distance from x to the edge line and alpha its outward
  // normal direction. Grazing wedge ends get end-clustered panels.
  size_t m = loop.size();
  if (m < 3) throw std::invalid_argument("complement_weight_polygon: degenerate loop");
  double s = kp.s;
  const GaussRule& g10 = gauss_legendre(10);
  const GaussRule& g8 = gauss_legendre(8);
  double acc = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const auto& A = loop[i];
    const auto& B = loop[(i + 1) % m];
    double ux = A[0] - x[0], uy = A[1] - x[1];
    double vx = B[0] - x[0], vy = B[1] - x[1];
    double cross = ux * vy - uy * vx;
    if (!(cross > 0.0))
      throw std::domain_error("complement_weight_polygon: point not inside");
    double theta_u = std::atan2(uy, ux);
    double delta = std::atan2(cross, ux * vx + uy * vy);  // wedge angle in (0,pi)
    double ex = B[0] - A[0], ey = B[1] - A[1];
    double el = std::hypot(ex, ey);
    double nx = ey / el, ny = -ex / el;  // outward for counterclockwise loops
    double p = nx * ux + ny * uy;
    double alpha = std::atan2(ny, nx);
    auto f = [&](double th) {
      double c = std::cos(th - alpha);
      return std::pow(p / c, -2.0 * s);
    };
    double c0 = std::cos(theta_u - alpha);
    double c1 = std::cos(theta_u + delta - alpha);
    double wedge = 0.0;
    if (std::min(c0, c1) >= 0.3) {
      double mid = theta_u + 0.5 * delta, half = 0.5 * delta;
      for (size_t q = 0; q < g10.x.size(); ++q) wedge += half * g10.w[q] * f(mid + half * g10.x[q]);
    } else {
      static const double knots[] = {0.0, 0.02, 0.08, 0.25, 0.5, 0.75, 0.92, 0.98, 1.0};
      for (size_t k = 0; k + 1 < std::size(knots); ++k) {
        double a = theta_u + delta * knots[k], b = theta_u + delta * knots[k + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (size_t q = 0; q < g8.x.size(); ++q) wedge += half * g8.w[q] * f(mid + half * g8.x[q]);
      }
    }
    acc += wedge;
  }
  return acc / (2.0 * s);
}

double complement_weight(const double* x, const Domain& domain, const KernelParams& kp) {
  double s = kp.s;
  switch (domain.kind) {
    case DomainKind::interval: {
      if (!(x[0] > domain.xl && x[0] < domain.xr))
        throw std::domain_error("complement_weight: point outside open interval");
      return (std::pow(domain.xr - x[0], -2.0 * s) + std::pow(x[0] - domain.xl, -2.0 * s)) /
             (2.0 * s);
    }
    case DomainKind::disc: {
      double r = std::hypot(x[0], x[1]);
      if (!(r < domain.radius))
        throw std::domain_error("complement_weight: point outside open disc");
      return disc_weight(r, domain.radius, s);
    }
    default: throw std::invalid_argument("complement_weight: unknown domain");
  }
}

}  // namespace fhc
