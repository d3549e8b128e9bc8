#include "vorstab/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace vorstab {

namespace {

Real series_j(int n, Real x) {
  // sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!), summed until terms vanish.
  const Real h = Real(0.5) * x;
  Real term = (n == 0) ? Real(1) : h;
  Real sum = term;
  for (int k = 1; k < 80; ++k) {
    term *= -(h * h) / (Real(k) * Real(k + n));
    sum += term;
    if (std::abs(term) < Real(1e-18) * (std::abs(sum) + Real(1e-30))) break;
  }
  return sum;
}

void miller_j01(Real x, Real& out0, Real& out1) {
  // Downward recurrence J_{m-1} = (2m/x) J_m - J_{m+1}, normalized by
  // J_0 + 2 J_2 + 2 J_4 + ... = 1. Start well above the turning point.
  const int start = static_cast<int>(x + Real(18) + Real(12) * std::cbrt(x));
  Real jp = Real(0), jc = Real(1e-300), norm = Real(0);
  for (int m = start; m >= 1; --m) {
    const Real jm = (Real(2 * m) / x) * jc - jp;
    jp = jc;  // J_m
    jc = jm;  // J_{m-1}
    if (m % 2 == 0) norm += Real(2) * jp;
    if (std::abs(jc) > Real(1e280)) {  // rescale to dodge overflow
      jp /= Real(1e280);
      jc /= Real(1e280);
      norm /= Real(1e280);
    }
  }
  norm += jc;  // the J_0 term of the normalization sum
  out0 = jc / norm;
  out1 = jp / norm;
}

}  // namespace

Real bessel_j(int n, Real x) {
  if (n != 0 && n != 1)
    throw std::invalid_argument("bessel_j: only orders 0 and 1 are provided");
  if (!(x >= Real(0)))
    throw std::invalid_argument("bessel_j: requires x >= 0");
  if (x <= Real(12)) return series_j(n, x);
  Real j0, j1;
  miller_j01(x, j0, j1);
  return n == 0 ? j0 : j1;
}

Real find_zero(const std::function<Real(Real)>& fn, Real lo, Real hi,
               Real tol) {
  if (!(lo < hi)) throw std::invalid_argument("find_zero: requires lo < hi");
  Real flo = fn(lo), fhi = fn(hi);
  if (flo == Real(0)) return lo;
  if (fhi == Real(0)) return hi;
  if ((flo < 0) == (fhi < 0))
    throw std::invalid_argument("find_zero: no sign change on [lo, hi]");
  while (hi - lo > tol) {
    Real mid = Real(0.5) * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at roundoff resolution
    Real fm = fn(mid);
    if (fm == Real(0)) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return Real(0.5) * (lo + hi);
}

Real gauss_legendre(const std::function<Real(Real)>& fn, Real lo, Real hi,
                    int panels) {
  if (panels < 1) throw std::invalid_argument("gauss_legendre: panels >= 1");
  // 8-point rule, nodes/weights on [-1, 1].
  static const Real xs[4] = {0.1834346424956498, 0.5255324099163290,
                             0.7966664774136267, 0.9602898564975363};
  static const Real ws[4] = {0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};
  const Real hpan = (hi - lo) / Real(panels);
  Real acc = Real(0);
  for (int p = 0; p < panels; ++p) {
    const Real c = lo + (Real(p) + Real(0.5)) * hpan;
    const Real s = Real(0.5) * hpan;
    for (int q = 0; q < 4; ++q)
      acc += ws[q] * s * (fn(c - s * xs[q]) + fn(c + s * xs[q]));
  }
  return acc;
}

Real radial_moment_integral() {
  // 64 panels x 8 nodes = 512 evaluations.
  return gauss_legendre(
      [](Real r) { return bessel_j(0, j1_zero1 * r) * r * r * r; }, Real(0),
      Real(1), 64);
}

std::array<ScalarField, 3> e1_basis(const Grid& g) {
  if (!g.is_disk())
    throw std::invalid_argument("e1_basis: defined on the disk only");
  std::array<ScalarField, 3> basis{
      sample_with(g, [](Real r, Real) { return bessel_j(0, j1_zero1 * r); }),
      sample_with(g,
                  [](Real r, Real t) {
                    return bessel_j(1, j1_zero1 * r) * std::cos(t);
                  }),
      sample_with(g, [](Real r, Real t) {
        return bessel_j(1, j1_zero1 * r) * std::sin(t);
      })};
  // Analytically orthogonal; a stabilized Gram-Schmidt under the grid inner
  // product removes the O(dr^2) quadrature cross-talk.
  for (int i = 0; i < 3; ++i) {
    for (int l = 0; l < i; ++l) {
      Real c = inner(g, basis[i], basis[l]);
      basis[i].values -= c * basis[l].values;
    }
    Real nrm = lp_norm(g, basis[i], Real(2));
    if (nrm <= Real(0)) throw std::runtime_error("e1_basis: degenerate basis");
    basis[i].values /= nrm;
  }
  return basis;
}

}  // namespace vorstab
