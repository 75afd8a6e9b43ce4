#pragma once

#include <utility>

#include "fhc/jacobi.hpp"
#include "fhc/problem.hpp"

namespace fhc {

struct PointPair {
  double u = 0.0;
  double f = 0.0;
};

// Closed-form solutions of the fractional Poisson problem on the unit
// interval / disc, with the forcing that produces them. j selects the even
// (0) or odd (1) family; u vanishes identically outside the domain.
PointPair exact_pair_1d(int k, int j, double s, double x);
PointPair exact_pair_2d(int k, int ell, double s, double r, double theta);

// A solution/forcing pair as spatial evaluators, tagged with its order s.
struct SpatialPair {
  double s = 0.0;
  SpatialFn u;
  SpatialFn g;
};
SpatialPair spatial_pair_1d(int k, int j, double s);
SpatialPair spatial_pair_2d(int k, int ell, double s);

using TimeFn = std::function<double(double)>;

struct TimeProfile {
  TimeFn psi, dpsi;  // psi(0) = 1
  TimeFn phi, dphi;  // phi(T) = 0
  double T = 1.0;
};
// Checks the endpoint normalizations to 1e-12.
TimeProfile make_time_profile(TimeFn psi, TimeFn dpsi, TimeFn phi, TimeFn dphi, double T);

// The optimal triple the manufactured data is reverse-engineered from,
// with squared L2(Q) norms of the state and control for error formulas.
struct ExactTriple {
  SpaceTimeFn ubar;  // psi(t) u(x)
  SpaceTimeFn pbar;  // -mu phi(t) v(x)
  SpaceTimeFn zbar;  // clamp of phi(t) v(x) to [a,b]
  SpaceTimeFn f;
  SpaceTimeFn u_d;
  SpatialFn u0;
  double ubar_l2q_sq = 0.0;
  double zbar_l2q_sq = 0.0;
};

// Builds problem data whose optimal triple is known in closed form. The
// pairs must share the requested s. Endpoint identities ubar(0,.) = u0 and
// pbar(T,.) = 0 are spot-checked at 100 seeded random points.
std::pair<ProblemSpec, ExactTriple> build_manufactured(double s, double mu, double a, double b,
                                                       double T, const SpatialPair& u_pair,
                                                       const SpatialPair& v_pair,
                                                       const TimeProfile& profile,
                                                       const Domain& domain);

struct TripleValue {
  double u, p, z;
};
TripleValue exact_optimal_triple(const ExactTriple& triple, double t, const double* x);

}  // namespace fhc
