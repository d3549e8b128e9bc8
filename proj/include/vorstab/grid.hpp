#pragma once

#include <string>
#include <utility>

#include "vorstab/types.hpp"

namespace vorstab {

// Cell-centered polar grid on the disk (a = 0) or annulus (0 < a < 1) of outer
// radius 1. Centers sit at r_j = a + (j + 1/2) dr, theta_k = (k + 1/2) dtheta,
// so no cell center touches r = 0 or a wall. ntheta must be even: the pole
// closure identifies the ghost ring below r_0 with the antipodal cells.
class Grid {
 public:
  Grid(Real a, Index nr, Index ntheta);

  Real a() const { return a_; }
  Index nr() const { return nr_; }
  Index ntheta() const { return ntheta_; }
  Real dr() const { return dr_; }
  Real dtheta() const { return dtheta_; }
  bool is_disk() const { return a_ == Real(0); }
  Index n_boundaries() const { return is_disk() ? 1 : 2; }

  Real r(Index j) const { return a_ + (Real(j) + Real(0.5)) * dr_; }
  Real theta(Index k) const { return (Real(k) + Real(0.5)) * dtheta_; }
  // Face radius between ring j-1 and ring j; r_face(0) is the inner wall (or
  // the pole), r_face(nr) the outer wall.
  Real r_face(Index j) const { return a_ + Real(j) * dr_; }
  Real cell_measure(Index j) const { return r(j) * dr_ * dtheta_; }

  // Per-ring measure column r_j*dr*dtheta, shared by every cell of ring j.
  const Vector& ring_measure() const { return ring_measure_; }
  const Vector& radii() const { return radii_; }
  Real total_measure() const { return total_measure_; }

  bool same_layout(const Grid& o) const {
    return nr_ == o.nr_ && ntheta_ == o.ntheta_ && a_ == o.a_;
  }

 private:
  Real a_;
  Index nr_;
  Index ntheta_;
  Real dr_;
  Real dtheta_;
  Vector radii_;
  Vector ring_measure_;
  Real total_measure_;
};

// Value-semantic cell field over a Grid. Exposes the raw Eigen array; all
// field algebra goes through it.
struct ScalarField {
  ScalarField() = default;
  ScalarField(const Grid& g, Real fill = Real(0))
      : a(g.a()), values(ArrayRT::Constant(g.nr(), g.ntheta(), fill)) {}

  Real a = Real(0);
  ArrayRT values;  // (nr, ntheta)

  Index nr() const { return values.rows(); }
  Index ntheta() const { return values.cols(); }
  bool matches(const Grid& g) const {
    return g.a() == a && g.nr() == nr() && g.ntheta() == ntheta();
  }
};

void require_match(const Grid& g, const ScalarField& f, const char* where);

// Midpoint-rule integral; the one discrete measure every norm, inner product,
// mean, and rearrangement below agrees on.
Real integrate(const Grid& g, const ScalarField& f);
Real inner(const Grid& g, const ScalarField& f, const ScalarField& h);
Real lp_norm(const Grid& g, const ScalarField& f, Real p);
Real mean(const Grid& g, const ScalarField& f);

// Weighted moments used by diagnostics: integral of r^2 f.
Real moment_of_inertia(const Grid& g, const ScalarField& f);

ScalarField sample(const Grid& g, Real (*fn)(Real r, Real theta));

template <typename F>
ScalarField sample_with(const Grid& g, F&& fn) {
  ScalarField out(g);
  for (Index k = 0; k < g.ntheta(); ++k)
    for (Index j = 0; j < g.nr(); ++j)
      out.values(j, k) = fn(g.r(j), g.theta(k));
  return out;
}

// Rotation by an integer number of grid sectors; an exact permutation.
ScalarField shift_theta(const Grid& g, const ScalarField& f, Index sectors);

// Field CSV: one header line `# a=<a> nr=<nr> ntheta=<ntheta>`, then
// `j,k,r,theta,value` rows with 17 significant digits, j-major.
void write_field_csv(const std::string& path, const Grid& g,
                     const ScalarField& f);
std::pair<Grid, ScalarField> read_field_csv(const std::string& path);
ScalarField read_field_csv(const std::string& path, const Grid& expect);

}  // namespace vorstab
