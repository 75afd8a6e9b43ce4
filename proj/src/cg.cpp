#include "fhc/cg.hpp"

#include <cmath>
#include <stdexcept>

namespace fhc {

namespace {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

std::pair<std::vector<double>, SolverReport> cg_solve(const SparseSymMatrix& A,
                                                      const std::vector<double>& b, double tol,
                                                      int max_iter, Precond precond,
                                                      const std::vector<double>* x0) {
  const int n = A.n;
  if ((int)b.size() != n) throw std::invalid_argument("cg_solve: size mismatch");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("cg_solve: non-finite right-hand side");

  SolverReport rep;
  double bnorm = std::sqrt(dot(b, b));
  std::vector<double> x(n, 0.0);
  if (x0) x = *x0;
  if (bnorm == 0.0 && !x0) {
    rep.converged = true;
    return {x, rep};
  }
  double denom = bnorm == 0.0 ? 1.0 : bnorm;

  std::vector<double> invd;
  if (precond == Precond::jacobi) {
    invd = A.diagonal();
    for (double& d : invd) {
      if (!(d > 0.0)) throw std::invalid_argument("cg_solve: non-positive diagonal");
      d = 1.0 / d;
    }
  }

  std::vector<double> r(n), z(n), p(n), Ap(n);
  A.multiply(x, Ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  double rnorm = std::sqrt(dot(r, r));
  rep.relative_residual = rnorm / denom;
  if (rep.relative_residual <= tol) {
    rep.converged = true;
    return {x, rep};
  }

  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (precond == Precond::jacobi)
      for (int i = 0; i < n; ++i) out[i] = invd[i] * in[i];
    else
      out = in;
  };

  apply_precond(r, z);
  p = z;
  double rz = dot(r, z);
  std::vector<double> best_x = x;
  double best_res = rep.relative_residual;

  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p, Ap);
    double pAp = dot(p, Ap);
    if (!std::isfinite(pAp) || pAp <= 0.0)
      throw std::runtime_error("cg_solve: matrix not positive definite along search direction");
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    rnorm = std::sqrt(dot(r, r));
    if (!std::isfinite(rnorm)) throw std::runtime_error("cg_solve: NaN residual");
    rep.iterations = it;
    rep.relative_residual = rnorm / denom;
    if (rep.relative_residual < best_res) {
      best_res = rep.relative_residual;
      best_x = x;
    }
    if (rep.relative_residual <= tol) {
      rep.converged = true;
      return {x, rep};
    }
    apply_precond(r, z);
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  rep.relative_residual = best_res;
  return {best_x, rep};
}

}  // namespace fhc
