#include "fhc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fhc/quadrature.hpp"

namespace fhc {

void ProblemSpec::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("ProblemSpec: s must lie in (0,1)");
  if (!(mu > 0.0)) throw std::invalid_argument("ProblemSpec: mu must be positive");
  if (!(a <= b)) throw std::invalid_argument("ProblemSpec: box bounds out of order");
  if (!(T > 0.0)) throw std::invalid_argument("ProblemSpec: horizon must be positive");
  if (domain.kind == DomainKind::unknown) throw std::invalid_argument("ProblemSpec: no domain");
  if (!f || !u_d || !u0) throw std::invalid_argument("ProblemSpec: missing data function");
}

PointPair exact_pair_1d(int k, int j, double s, double x) {
  if (j != 0 && j != 1) throw std::invalid_argument("exact_pair_1d: parity must be 0 or 1");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("exact_pair_1d: s must lie in (0,1)");
  JacobiIndex idx{k, s, j == 0 ? -0.5 : 0.5, 0};
  double P = jacobi_eval(idx, 2.0 * x * x - 1.0);
  double gs = std::tgamma(1.0 + s);
  double c = std::pow(2.0, 2.0 * s) * gs * gs *
             gen_binom(s + k + (j == 0 ? -0.5 : 0.5), s) * gen_binom(s + k, s);
  double odd = j == 0 ? 1.0 : x;
  PointPair pv;
  pv.f = c * odd * P;
  double w = 1.0 - x * x;
  pv.u = w > 0.0 ? odd * P * std::pow(w, s) : 0.0;
  return pv;
}

PointPair exact_pair_2d(int k, int ell, double s, double r, double theta) {
  if (ell < 0) throw std::invalid_argument("exact_pair_2d: negative angular index");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("exact_pair_2d: s must lie in (0,1)");
  JacobiIndex idx{k, s, (double)ell, ell};
  double P = jacobi_eval(idx, 2.0 * r * r - 1.0);
  double gs = std::tgamma(1.0 + s);
  double c = std::pow(2.0, 2.0 * s) * gs * gs * gen_binom(s + k + ell, s) * gen_binom(s + k, s);
  double ang = std::pow(r, ell) * std::cos(ell * theta);
  PointPair pv;
  pv.f = c * ang * P;
  double w = 1.0 - r * r;
  pv.u = w > 0.0 ? ang * P * std::pow(w, s) : 0.0;
  return pv;
}

SpatialPair spatial_pair_1d(int k, int j, double s) {
  SpatialPair sp;
  sp.s = s;
  sp.u = [k, j, s](const double* x) { return exact_pair_1d(k, j, s, x[0]).u; };
  sp.g = [k, j, s](const double* x) { return exact_pair_1d(k, j, s, x[0]).f; };
  return sp;
}

SpatialPair spatial_pair_2d(int k, int ell, double s) {
  SpatialPair sp;
  sp.s = s;
  sp.u = [k, ell, s](const double* x) {
    return exact_pair_2d(k, ell, s, std::hypot(x[0], x[1]), std::atan2(x[1], x[0])).u;
  };
  sp.g = [k, ell, s](const double* x) {
    return exact_pair_2d(k, ell, s, std::hypot(x[0], x[1]), std::atan2(x[1], x[0])).f;
  };
  return sp;
}

TimeProfile make_time_profile(TimeFn psi, TimeFn dpsi, TimeFn phi, TimeFn dphi, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("make_time_profile: horizon must be positive");
  TimeProfile p{std::move(psi), std::move(dpsi), std::move(phi), std::move(dphi), T};
  if (std::abs(p.psi(0.0) - 1.0) > 1e-12)
    throw std::invalid_argument("make_time_profile: psi(0) must equal 1");
  if (std::abs(p.phi(T)) > 1e-12)
    throw std::invalid_argument("make_time_profile: phi(T) must vanish");
  return p;
}

namespace {

// L2 integral of F over the domain, via adaptive rules; tolerance absolute.
double domain_integral(const Domain& dom, const std::function<double(const double*)>& F,
                       double tol) {
  if (dom.kind == DomainKind::interval) {
    return adaptive_integrate(
        [&](double x) {
          double p[2] = {x, 0.0};
          return F(p);
        },
        dom.xl, dom.xr, tol);
  }
  if (dom.kind == DomainKind::disc) {
    return adaptive_integrate(
        [&](double r) {
          double ang = adaptive_integrate(
              [&](double th) {
                double p[2] = {r * std::cos(th), r * std::sin(th)};
                return F(p);
              },
              0.0, 2.0 * std::numbers::pi, tol);
          return r * ang;
        },
        0.0, dom.radius, tol);
  }
  throw std::invalid_argument("domain_integral: unknown domain");
}

}  // namespace

std::pair<ProblemSpec, ExactTriple> build_manufactured(double s, double mu, double a, double b,
                                                       double T, const SpatialPair& u_pair,
                                                       const SpatialPair& v_pair,
                                                       const TimeProfile& profile,
                                                       const Domain& domain) {
  if (std::abs(u_pair.s - s) > 1e-14 || std::abs(v_pair.s - s) > 1e-14)
    throw std::invalid_argument("build_manufactured: family order differs from requested s");
  if (std::abs(profile.T - T) > 1e-14)
    throw std::invalid_argument("build_manufactured: profile horizon differs from T");

  SpatialFn u = u_pair.u, fu = u_pair.g, v = v_pair.u, gv = v_pair.g;
  TimeFn psi = profile.psi, dpsi = profile.dpsi, phi = profile.phi, dphi = profile.dphi;

  ProblemSpec spec;
  spec.s = s;
  spec.mu = mu;
  spec.a = a;
  spec.b = b;
  spec.T = T;
  spec.domain = domain;
  spec.f = [=](double t, const double* x) {
    return dpsi(t) * u(x) + psi(t) * fu(x) - std::clamp(phi(t) * v(x), a, b);
  };
  // Forcing that makes the adjoint of the exact state reproduce -mu phi v:
  // the tracking misfit must equal mu(phi' v - phi g).
  spec.u_d = [=](double t, const double* x) {
    return psi(t) * u(x) - mu * dphi(t) * v(x) + mu * phi(t) * gv(x);
  };
  spec.u0 = u;
  spec.validate();

  ExactTriple tr;
  tr.ubar = [=](double t, const double* x) { return psi(t) * u(x); };
  tr.pbar = [=](double t, const double* x) { return -mu * phi(t) * v(x); };
  tr.zbar = [=](double t, const double* x) { return std::clamp(phi(t) * v(x), a, b); };
  tr.f = spec.f;
  tr.u_d = spec.u_d;
  tr.u0 = spec.u0;

  double u_sq = domain_integral(domain, [&](const double* x) { return u(x) * u(x); }, 1e-12);
  double psi_sq = adaptive_integrate([&](double t) { return psi(t) * psi(t); }, 0.0, T, 1e-12);
  tr.ubar_l2q_sq = psi_sq * u_sq;
  tr.zbar_l2q_sq = adaptive_integrate(
      [&](double t) {
        return domain_integral(
            domain,
            [&](const double* x) {
              double z = std::clamp(phi(t) * v(x), a, b);
              return z * z;
            },
            1e-12);
      },
      0.0, T, 1e-11);

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    double p[2] = {0.0, 0.0};
    if (domain.kind == DomainKind::interval) {
      p[0] = domain.xl + (domain.xr - domain.xl) * 0.5 * (unit(rng) + 1.0);
    } else {
      p[0] = domain.radius * unit(rng);
      p[1] = domain.radius * unit(rng);
      if (std::hypot(p[0], p[1]) >= domain.radius) continue;
    }
    ++checked;
    if (std::abs(tr.ubar(0.0, p) - spec.u0(p)) > 1e-12 * (1.0 + std::abs(spec.u0(p))))
      throw std::logic_error("build_manufactured: state does not match initial data at t=0");
    if (std::abs(tr.pbar(T, p)) > 1e-12)
      throw std::logic_error("build_manufactured: adjoint does not vanish at t=T");
  }
  return {spec, tr};
}

TripleValue exact_optimal_triple(const ExactTriple& triple, double t, const double* x) {
  return {triple.ubar(t, x), triple.pbar(t, x), triple.zbar(t, x)};
}

}  // namespace fhc
