#pragma once

#include "fhc/mesh.hpp"

namespace fhc {

struct KernelParams {
  int n = 1;       // spatial dimension
  double s = 0.5;  // fractional order, in (0,1)
  double c_ns = 0.0;
};

// c_ns = 2^{2s} s Gamma(s + n/2) / (pi^{n/2} Gamma(1-s))
double kernel_constant(int n, double s);
KernelParams make_kernel_params(int n, double s);

// rho(x) = integral over the domain complement of |x-y|^{-n-2s} dy.
// Analytic for intervals; adaptive periodic quadrature (rel tol 1e-8) for
// the disc. x must lie strictly inside the domain.
double complement_weight(const double* x, const Domain& domain, const KernelParams& kp);

// Same integral for the complement of the convex polygon with vertices
// `loop` in counterclockwise order. Discrete functions on a polygonal mesh
// vanish outside the polygon, not outside the ideal domain, so this is the
// weight the assembly of a curved domain needs. x must lie strictly inside.
double complement_weight_polygon(const double* x,
                                 const std::vector<std::array<double, 2>>& loop,
                                 const KernelParams& kp);

}  // namespace fhc
