#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "vorstab/bessel.hpp"
#include "vorstab/spectra.hpp"

using namespace vorstab;

namespace {

Real bessel_j2(Real x) { return 2 / x * bessel_j(1, x) - bessel_j(0, x); }

}  // namespace

TEST_CASE("disk dirichlet spectrum starts at the first two bessel eigenvalues") {
  const Grid g(0.0, 64, 128);
  const EllipticContext ctx(g);
  const EigenResult res = dirichlet_spectrum(ctx, 2);
  CHECK(res.eigenvalues[0] == doctest::Approx(j0_zero1 * j0_zero1).epsilon(1e-2));
  CHECK(res.eigenvalues[1] == doctest::Approx(j1_zero1 * j1_zero1).epsilon(1e-2));
  CHECK(res.multiplicities[0] == 1);
  CHECK(res.multiplicities[1] == 2);
  CHECK(res.eigenvalues[0] < res.eigenvalues[1]);
}

TEST_CASE("disk constrained spectrum has a triple ground level then a double") {
  const Grid g(0.0, 64, 128);
  const EllipticContext ctx(g);
  const EigenResult res = constrained_spectrum(ctx, 2);

  CHECK(res.eigenvalues[0] == doctest::Approx(j1_zero1 * j1_zero1).epsilon(1e-2));
  CHECK(res.multiplicities[0] == 3);

  const Real j21 = find_zero(bessel_j2, 4.5, 6.0);
  CHECK(res.eigenvalues[1] == doctest::Approx(j21 * j21).epsilon(1e-2));
  CHECK(res.multiplicities[1] == 2);

  // Computed ground family spans the analytic bessel triple.
  const auto analytic = e1_basis(g);
  const std::vector<ScalarField> a(analytic.begin(), analytic.end());
  CHECK(subspace_angle(g, res.groups[0].fields, a) < 1e-2);
}

TEST_CASE("constrained ground eigenvalue converges at second order") {
  const Real exact = j1_zero1 * j1_zero1;
  auto err = [&](Index nr, Index nt) {
    const Grid g(0.0, nr, nt);
    const EllipticContext ctx(g);
    return std::abs(constrained_spectrum(ctx, 1).eigenvalues[0] - exact);
  };
  const Real e1 = err(32, 64), e2 = err(64, 128);
  CHECK(e1 / e2 > 3.0);
  CHECK(e1 / e2 < 5.5);
}

TEST_CASE("constrained eigenfields are orthonormal members of the flux-free class") {
  const Grid g(0.0, 48, 96);
  const EllipticContext ctx(g);
  const EigenResult res = constrained_spectrum(ctx, 1);
  const EigenGroup& grp = res.groups[0];
  REQUIRE(grp.fields.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j)
      CHECK(inner(g, grp.fields[i], grp.fields[j]) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    CHECK(std::abs(mean(g, grp.fields[i])) < 1e-10);
  }
  // Eigenrelation at the field's own traces. Each member carries its own
  // sector eigenvalue inside the split cluster [value, value + spread], and
  // against that value the relation holds to roundoff.
  for (const ScalarField& f : grp.fields) {
    Vector traces(1);
    traces[0] = f.values.row(g.nr() - 1).mean();
    ArrayRT lap;
    ctx.apply_operator(f.values, traces, lap);
    ScalarField lf(g);
    lf.values = lap;
    const Real lam = inner(g, lf, f) / inner(g, f, f);
    CHECK(lam >= grp.value - 1e-9 * grp.value);
    CHECK(lam <= grp.value + grp.spread + 1e-9 * grp.value);
    CHECK((lap - lam * f.values).abs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("annulus constrained spectrum sits strictly above the cap eigenvalue") {
  for (Index nr : {24, 32, 48}) {
    const Grid g(0.5, nr, 2 * nr);
    const EllipticContext ctx(g);
    const Real big1 = constrained_spectrum(ctx, 1).eigenvalues[0];
    const CapResult cap = lambda_cap1(ctx);
    CHECK(big1 > cap.value);
    CHECK((big1 - cap.value) / big1 > 1e-3);  // a real margin, not roundoff
  }
}

TEST_CASE("cap eigenvalue on the disk is the dirichlet ground state") {
  const Grid g(0.0, 64, 32);
  const EllipticContext ctx(g);
  const CapResult cap = lambda_cap1(ctx);
  const EigenResult dir = dirichlet_spectrum(ctx, 1);
  CHECK(cap.value == doctest::Approx(dir.eigenvalues[0]).epsilon(1e-13));
  CHECK(cap.value == doctest::Approx(j0_zero1 * j0_zero1).epsilon(1e-2));
  CHECK(cap.sector == 0);
  CHECK(cap.one_signed);
}

TEST_CASE("cap minimizer on the annulus is radial and one-signed") {
  const Grid g(0.5, 48, 64);
  const EllipticContext ctx(g);
  const CapResult cap = lambda_cap1(ctx);
  CHECK(cap.sector == 0);
  CHECK(cap.one_signed);
  // Relaxing the inner wall can only lower the eigenvalue.
  const EigenResult dir = dirichlet_spectrum(ctx, 1);
  CHECK(cap.value < dir.eigenvalues[0]);
}

TEST_CASE("sector modes reproduce the first angular bessel profile") {
  const Grid g(0.0, 96, 16);
  const SectorModes modes = sector_dirichlet_modes(g, 1, 2);
  CHECK(modes.values[0] == doctest::Approx(j1_zero1 * j1_zero1).epsilon(1e-3));
  // Compare normalized profiles against J1(j11 r).
  Vector exact(g.nr());
  for (Index j = 0; j < g.nr(); ++j) exact[j] = bessel_j(1, j1_zero1 * g.r(j));
  Vector got = modes.profiles.col(0);
  got /= got.norm();
  exact /= exact.norm();
  if (got.dot(exact) < 0) got = -got;
  CHECK((got - exact).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("rayleigh equality holds on the computed ground family") {
  const Grid g(0.0, 48, 96);
  const EllipticContext ctx(g);
  const EigenResult res = constrained_spectrum(ctx, 2);
  const Real lam1 = res.eigenvalues[0];
  const Real spread = res.groups[0].spread;
  // The triple ground eigenvalue splits across sectors at second order in dr;
  // the split is real but small compared with the gap to the next family.
  CHECK(spread > 0);
  CHECK(spread < 1e-3 * lam1);
  for (const ScalarField& f : res.groups[0].fields) {
    for (WhichInequality which :
         {WhichInequality::x_space, WhichInequality::y_space, WhichInequality::gradient_form}) {
      const InequalityReport rep = rayleigh_check(ctx, f, which, 1e-6, lam1, spread);
      CHECK(rep.membership_ok);
      CHECK(rep.equality);
      CHECK(rep.defect >= -1e-9 * std::abs(rep.rhs));
      CHECK(rep.defect <= spread * inner(g, f, f) * 1.001 + 1e-9 * std::abs(rep.rhs));
    }
  }
  // The purely radial member carries the cluster minimum itself, so its
  // equality is exact to roundoff even with no slack admitted.
  const InequalityReport tight =
      rayleigh_check(ctx, res.groups[0].fields[0], WhichInequality::y_space, 1e-6, lam1);
  CHECK(tight.equality);
  CHECK(std::abs(tight.defect) < 1e-9 * std::abs(tight.rhs));
}

TEST_CASE("rayleigh defect on the second family matches the spectral gap") {
  const Grid g(0.0, 48, 96);
  const EllipticContext ctx(g);
  const EigenResult res = constrained_spectrum(ctx, 2);
  const Real lam1 = res.eigenvalues[0];
  const Real lam2 = res.eigenvalues[1];
  const ScalarField& f = res.groups[1].fields[0];  // unit norm
  const InequalityReport rep = rayleigh_check(ctx, f, WhichInequality::y_space, 1e-6, lam1);
  CHECK(rep.membership_ok);
  CHECK_FALSE(rep.equality);
  CHECK(rep.defect == doctest::Approx(lam2 - lam1).epsilon(1e-6));
}

TEST_CASE("rayleigh membership gates reject non-members") {
  const Grid g(0.0, 32, 64);
  const EllipticContext ctx(g);
  const Real lam1 = constrained_spectrum(ctx, 1).eigenvalues[0];

  ScalarField biased(g, 1.0);  // nonzero mean
  InequalityReport rep = rayleigh_check(ctx, biased, WhichInequality::x_space, 1e-6, lam1);
  CHECK_FALSE(rep.membership_ok);
  CHECK(rep.note == "mean is not zero");

  // Radial parabola: constant trace, mean removed, but nonzero wall flux.
  auto u = sample_with(g, [](Real r, Real) { return 1 - r * r; });
  u.values -= mean(g, u);
  rep = rayleigh_check(ctx, u, WhichInequality::y_space, 1e-6, lam1);
  CHECK_FALSE(rep.membership_ok);
  CHECK(rep.note == "wall flux is not zero");
  // The same field is a legitimate member of the larger class.
  rep = rayleigh_check(ctx, u, WhichInequality::x_space, 1e-6, lam1);
  CHECK(rep.membership_ok);
  CHECK_FALSE(rep.equality);
  CHECK(rep.defect > 0);

  // Non-constant trace.
  auto skew = sample_with(g, [](Real r, Real t) { return r * r * std::cos(t); });
  skew.values -= mean(g, skew);
  rep = rayleigh_check(ctx, skew, WhichInequality::x_space, 1e-6, lam1);
  CHECK_FALSE(rep.membership_ok);
  CHECK(rep.note == "wall trace is not constant");

  ScalarField zero(g);
  rep = rayleigh_check(ctx, zero, WhichInequality::y_space, 1e-6, lam1);
  CHECK(rep.membership_ok);
  CHECK(rep.equality);
}

TEST_CASE("subspace angle separates identical and orthogonal spans") {
  const Grid g(0.0, 24, 48);
  auto c1 = sample_with(g, [](Real r, Real t) { return r * (1 - r) * std::cos(t); });
  auto s1 = sample_with(g, [](Real r, Real t) { return r * (1 - r) * std::sin(t); });
  auto c2 = sample_with(g, [](Real r, Real t) { return r * r * (1 - r) * std::cos(t); });
  CHECK(subspace_angle(g, {c1}, {c1}) < 1e-7);
  CHECK(subspace_angle(g, {c1}, {s1}) == doctest::Approx(pi / 2).epsilon(1e-12));
  CHECK(subspace_angle(g, {c1}, {c2}) > 0.1);
  CHECK(subspace_angle(g, {c1, s1}, {s1, c1}) < 1e-7);
}
