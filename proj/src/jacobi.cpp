#include "fhc/jacobi.hpp"

#include <cmath>
#include <stdexcept>

namespace fhc {

double jacobi_eval(const JacobiIndex& idx, double x) {
  if (idx.k < 0) throw std::invalid_argument("jacobi_eval: negative degree");
  if (!(idx.alpha > -1.0) || !(idx.beta > -1.0))
    throw std::invalid_argument("jacobi_eval: parameters must exceed -1");
  const double a = idx.alpha, b = idx.beta;
  if (idx.k == 0) return 1.0;
  double pm1 = 1.0;
  double p = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
  for (int n = 2; n <= idx.k; ++n) {
    double c = 2.0 * n + a + b;
    double a1 = 2.0 * n * (n + a + b) * (c - 2.0);
    double a2 = (c - 1.0) * (a * a - b * b);
    double a3 = (c - 1.0) * c * (c - 2.0);
    double a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c;
    double next = ((a2 + a3 * x) * p - a4 * pm1) / a1;
    pm1 = p;
    p = next;
  }
  return p;
}

double gen_binom(double x, double y) {
  if (!(x + 1.0 > 0.0) || !(y + 1.0 > 0.0) || !(x - y + 1.0 > 0.0))
    throw std::invalid_argument("gen_binom: arguments outside supported range");
  return std::exp(std::lgamma(x + 1.0) - std::lgamma(y + 1.0) - std::lgamma(x - y + 1.0));
}

}  // namespace fhc
