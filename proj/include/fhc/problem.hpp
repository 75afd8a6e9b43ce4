#pragma once

#include <functional>

#include "fhc/mesh.hpp"

namespace fhc {

using SpatialFn = std::function<double(const double*)>;
using SpaceTimeFn = std::function<double(double, const double*)>;

// Data of one control problem instance: minimize
//   1/2 |u - u_d|^2_{L2(Q)} + mu/2 |z|^2_{L2(Q)}
// over controls with values in [a,b], subject to the fractional heat
// equation with forcing f + z and initial state u0.
struct ProblemSpec {
  double s = 0.5;
  double mu = 0.1;
  double a = -0.5;
  double b = 0.5;
  double T = 1.0;
  Domain domain;
  SpaceTimeFn f;
  SpaceTimeFn u_d;
  SpatialFn u0;

  void validate() const;
};

}  // namespace fhc
