#pragma once

namespace fhc {

struct JacobiIndex {
  int k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  int ell = 0;  // angular index, 2D families only
};

// P_k^{(alpha,beta)}(x) by the three-term recurrence.
double jacobi_eval(const JacobiIndex& idx, double x);

// Generalized binomial coefficient Gamma(x+1)/(Gamma(y+1)Gamma(x-y+1)),
// arguments restricted to the positive-Gamma range used here.
double gen_binom(double x, double y);

}  // namespace fhc
