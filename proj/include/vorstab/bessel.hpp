#pragma once

#include <array>
#include <functional>

#include "vorstab/grid.hpp"
#include "vorstab/types.hpp"

namespace vorstab {

// Cylinder functions of order 0 and 1 only; higher orders are out of scope
// here (grid-level mode bases come from the discrete operators instead).
Real bessel_j(int n, Real x);

// First positive zeros, to full double precision.
inline constexpr Real j0_zero1 = 2.404825557695773;
inline constexpr Real j1_zero1 = 3.831705970207512;

// Bisection for a sign change of fn on [lo, hi]; refines to |hi-lo| <= tol.
Real find_zero(const std::function<Real(Real)>& fn, Real lo, Real hi,
               Real tol = Real(1e-13));

// Composite Gauss-Legendre on [lo, hi]: `panels` panels of 8 nodes each.
Real gauss_legendre(const std::function<Real(Real)>& fn, Real lo, Real hi,
                    int panels);

// integral_0^1 J0(j1_zero1 r) r^3 dr, by 512-node composite Gauss-Legendre.
// Strictly negative; the sign is what the rigidity experiment leans on.
Real radial_moment_integral();

// Orthonormal (in the grid inner product) basis of the critical eigenspace on
// the disk: radial J0(j11 r) plus the J1(j11 r) cos/sin pair. Rejects a > 0.
std::array<ScalarField, 3> e1_basis(const Grid& g);

}  // namespace vorstab
