#pragma once

#include "fhc/kernel.hpp"
#include "fhc/mesh.hpp"
#include "fhc/sparse.hpp"

namespace fhc {

// Stiffness matrix recomputed from the shift-correlation form
//   A(u,v) = (c_ns/2) * integral over t of |t|^{-n-2s} S(t),
//   S(t) = integral of (u(x)-u(x+t)) (v(x)-v(x+t)) dx over R^n,
// with u, v extended by zero. Correlations are exact piecewise-polynomial
// integrals (interval splitting in 1D, polygon clipping in 2D); the radial
// factor is integrated adaptively in log coordinates with an analytic tail.
// Shares nothing with the pairwise singular quadrature. Dense and slow;
// meant for meshes with at most a few dozen cells.
SparseSymMatrix reference_stiffness(const Mesh& mesh, const KernelParams& kp);

// Single entry of the same form, for spot checks on larger meshes.
double reference_stiffness_entry(const Mesh& mesh, const KernelParams& kp,
                                 int dof_i, int dof_j);

}  // namespace fhc
