#include "vorstab/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vorstab {

namespace {

// Symmetrized radial sector: conjugating the tridiagonal by sqrt(r) keeps the
// spectrum and hands Eigen a symmetric problem.
void sector_tridiagonal(const Grid& g, const RadialOperator& op, Vector& diag, Vector& sub) {
  const Index nr = g.nr();
  diag = op.diag;
  sub.resize(nr - 1);
  for (Index j = 1; j < nr; ++j)
    sub[j - 1] = op.sub[j - 1] * std::sqrt(g.r(j) / g.r(j - 1));
}

struct SectorEigen {
  Vector values;    // ascending
  Matrix profiles;  // nr x n, unweighted radial profiles
};

SectorEigen sector_eigen(const Grid& g, const RadialOperator& op) {
  Vector diag, sub;
  sector_tridiagonal(g, op, diag, sub);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sector_eigen: tridiagonal eigensolver failed");
  SectorEigen out;
  out.values = es.eigenvalues();
  out.profiles = es.eigenvectors();
  for (Index j = 0; j < g.nr(); ++j) out.profiles.row(j) /= std::sqrt(g.r(j));
  return out;
}

// Dense eigensolve of the radial sector of T restricted to mean-zero fields.
// Columns of T are assembled by solving; the measure square root symmetrizes;
// a Householder frame removes the mean direction. Eigenvalues returned as
// 1/mu in ascending order.
SectorEigen mode0_constrained(const EllipticContext& ctx) {
  const Grid& g = ctx.grid();
  const Index n = g.nr();
  const Vector W = g.ring_measure() * Real(g.ntheta());
  const Vector sqw = W.cwiseSqrt();

  Matrix T0(n, n);
  for (Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = 1;
    Vector col = ctx.solve_mode0(e);
    if (!g.is_disk()) col += ctx.q11() * (ctx.zeta()[j] * W[j]) * ctx.zeta();
    col.array() -= W.dot(col) / g.total_measure();
    T0.col(j) = col;
  }
  Matrix M = sqw.asDiagonal() * T0 * sqw.cwiseInverse().asDiagonal();

  Eigen::HouseholderQR<Matrix> qr(sqw / sqw.norm());
  Matrix Q = Matrix(qr.householderQ()).rightCols(n - 1);
  Matrix S = Q.transpose() * M * Q;
  S = ((S + S.transpose()) / 2).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("mode0_constrained: dense eigensolver failed");

  SectorEigen out;
  out.values.resize(n - 1);
  out.profiles.resize(n, n - 1);
  for (Index i = 0; i < n - 1; ++i) {
    const Real mu = es.eigenvalues()[n - 2 - i];  // descending mu
    if (mu <= 0)
      throw std::runtime_error("mode0_constrained: nonpositive mode of the compact operator");
    out.values[i] = 1 / mu;
    out.profiles.col(i) = (Q * es.eigenvectors().col(n - 2 - i)).cwiseQuotient(sqw);
  }
  return out;
}

struct Candidate {
  Real value;
  Index m;
  Vector profile;
};

void flip_to_positive(Vector& v) {
  const Real vmax = v.cwiseAbs().maxCoeff();
  for (Index j = 0; j < v.size(); ++j) {
    if (std::abs(v[j]) > Real(1e-12) * vmax) {
      if (v[j] < 0) v = -v;
      return;
    }
  }
}

ScalarField profile_field(const Grid& g, const Vector& profile, Index m, bool sine) {
  ScalarField f(g);
  for (Index k = 0; k < g.ntheta(); ++k) {
    const Real t = g.theta(k);
    const Real ang = (m == 0) ? Real(1) : (sine ? std::sin(Real(m) * t) : std::cos(Real(m) * t));
    f.values.col(k) = profile.array() * ang;
  }
  const Real nrm = lp_norm(g, f, 2);
  f.values /= nrm;
  return f;
}

int sector_multiplicity(const Grid& g, Index m) {
  if (m == 0) return 1;
  return (m == g.ntheta() / 2) ? 1 : 2;
}

void append_group_fields(const Grid& g, EigenGroup& grp, const Candidate& c) {
  Vector prof = c.profile;
  flip_to_positive(prof);
  if (c.m == 0) {
    grp.fields.push_back(profile_field(g, prof, 0, false));
  } else if (c.m == g.ntheta() / 2) {
    // On the half-offset grid the representable Nyquist harmonic is the
    // alternating (sine) one.
    grp.fields.push_back(profile_field(g, prof, c.m, true));
  } else {
    grp.fields.push_back(profile_field(g, prof, c.m, false));
    grp.fields.push_back(profile_field(g, prof, c.m, true));
  }
}

void orthonormalize_group(const Grid& g, EigenGroup& grp) {
  for (size_t i = 0; i < grp.fields.size(); ++i) {
    ScalarField& f = grp.fields[i];
    for (size_t j = 0; j < i; ++j)
      f.values -= inner(g, grp.fields[j], f) * grp.fields[j].values;
    const Real nrm = lp_norm(g, f, 2);
    if (nrm < Real(1e-10))
      throw std::runtime_error("orthonormalize_group: degenerate eigenfield family");
    f.values /= nrm;
  }
}

// Collects sector eigenvalues in ascending order until `count` clusters are
// safely complete, then groups them at the relative gap.
EigenResult assemble_spectrum(const EllipticContext& ctx, int count, Real gap,
                              bool constrained) {
  const Grid& g = ctx.grid();
  if (count < 1) throw std::invalid_argument("spectrum: count must be positive");
  std::vector<Candidate> cand;

  auto harvest = [&](Index m, const SectorEigen& se) {
    for (Index i = 0; i < se.values.size(); ++i)
      cand.push_back({se.values[i], m, se.profiles.col(i)});
  };

  if (constrained) {
    harvest(0, mode0_constrained(ctx));
  } else {
    harvest(0, sector_eigen(g, radial_operator(g, 0, WallBc::dirichlet, WallBc::dirichlet)));
  }

  // Once `count` clusters have formed among collected values, later sectors
  // matter only below the last cluster (sector minima grow with m).
  auto cluster_bound = [&]() {
    std::vector<Real> vals;
    vals.reserve(cand.size());
    for (const auto& c : cand) vals.push_back(c.value);
    std::sort(vals.begin(), vals.end());
    int clusters = 0;
    Real rep = 0;
    for (Real v : vals) {
      if (clusters == 0 || (v - rep) > gap * rep) {
        rep = v;
        if (++clusters == count) return rep * (1 + 10 * gap);
      }
    }
    return std::numeric_limits<Real>::infinity();
  };

  for (Index m = 1; m <= g.ntheta() / 2; ++m) {
    const auto se =
        sector_eigen(g, radial_operator(g, Real(m) * Real(m), WallBc::dirichlet, WallBc::dirichlet));
    if (se.values[0] > cluster_bound()) break;
    harvest(m, se);
  }

  std::sort(cand.begin(), cand.end(),
            [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

  EigenResult out;
  for (const auto& c : cand) {
    const bool fresh = out.groups.empty() ||
                       (c.value - out.groups.back().value) > gap * out.groups.back().value;
    if (fresh) {
      if (static_cast<int>(out.groups.size()) == count) break;
      out.groups.push_back({c.value, Real(0), 0, {}});
    }
    EigenGroup& grp = out.groups.back();
    grp.spread = c.value - grp.value;  // candidates arrive ascending
    grp.multiplicity += sector_multiplicity(g, c.m);
    append_group_fields(g, grp, c);
  }
  if (static_cast<int>(out.groups.size()) < count)
    throw std::runtime_error("spectrum: fewer clusters available than requested");
  for (auto& grp : out.groups) {
    orthonormalize_group(g, grp);
    out.eigenvalues.push_back(grp.value);
    out.multiplicities.push_back(grp.multiplicity);
  }
  return out;
}

}  // namespace

EigenResult dirichlet_spectrum(const EllipticContext& ctx, int count, Real cluster_gap) {
  return assemble_spectrum(ctx, count, cluster_gap, false);
}

EigenResult constrained_spectrum(const EllipticContext& ctx, int count, Real cluster_gap) {
  return assemble_spectrum(ctx, count, cluster_gap, true);
}

SectorModes sector_dirichlet_modes(const Grid& g, Index m, int count) {
  if (count < 1 || count > g.nr())
    throw std::invalid_argument("sector_dirichlet_modes: bad count");
  const auto se = sector_eigen(g, radial_operator(g, Real(m) * Real(m), WallBc::dirichlet,
                                                  WallBc::dirichlet));
  SectorModes out;
  out.values = se.values.head(count);
  out.profiles = se.profiles.leftCols(count);
  return out;
}

CapResult lambda_cap1(const EllipticContext& ctx) {
  const Grid& g = ctx.grid();
  // Free constant on the inner wall => natural zero-flux closure there; on
  // the disk the sector operator is unchanged (the center face has no area).
  const WallBc inner_bc = g.is_disk() ? WallBc::dirichlet : WallBc::zero_flux;

  CapResult best;
  best.value = std::numeric_limits<Real>::infinity();
  Vector best_profile;
  auto consider = [&](Index m, const SectorEigen& se) {
    if (se.values[0] < best.value) {
      best.value = se.values[0];
      best.sector = m;
      best_profile = se.profiles.col(0);
    }
  };

  consider(0, sector_eigen(g, radial_operator(g, 0, inner_bc, WallBc::dirichlet)));
  for (Index m = 1; m <= g.ntheta() / 2; ++m) {
    const auto se = sector_eigen(
        g, radial_operator(g, Real(m) * Real(m), WallBc::dirichlet, WallBc::dirichlet));
    const Real smallest = se.values[0];
    if (smallest >= best.value) break;  // sector minima increase with m
    consider(m, se);
  }

  flip_to_positive(best_profile);
  best.minimizer = profile_field(g, best_profile, best.sector,
                                 best.sector == g.ntheta() / 2);
  const Real lo = best.minimizer.values.minCoeff();
  const Real hi = best.minimizer.values.maxCoeff();
  const Real scale = std::max(std::abs(lo), std::abs(hi));
  best.one_signed = (lo >= -Real(1e-10) * scale) || (hi <= Real(1e-10) * scale);
  return best;
}

InequalityReport rayleigh_check(const EllipticContext& ctx, const ScalarField& u,
                                WhichInequality which, Real tol, Real lambda1,
                                Real lambda1_spread) {
  const Grid& g = ctx.grid();
  require_match(g, u, "rayleigh_check");
  InequalityReport rep;
  const Real umax = u.values.abs().maxCoeff();
  if (lambda1 <= 0) {
    const auto ground = constrained_spectrum(ctx, 1);
    lambda1 = ground.eigenvalues[0];
    lambda1_spread = ground.groups[0].spread;
  }
  rep.lambda1 = lambda1;
  if (umax == 0) {  // degenerate member: both sides vanish
    rep.membership_ok = true;
    rep.equality = true;
    return rep;
  }
  const Real scale_u = std::max(Real(1), umax);

  // Wall traces: ring-edge means. These minimize the discrete gradient form
  // over constant traces and equal the true traces of flux-free fields.
  Vector traces(g.n_boundaries());
  traces[0] = u.values.row(g.nr() - 1).mean();
  if (!g.is_disk()) traces[1] = u.values.row(0).mean();

  rep.mean_defect = std::abs(mean(g, u));
  auto trace_spread = [&](Index e, Index e1, Index e2) {
    Real c = 0, dev = 0;
    Vector est(g.ntheta());
    for (Index k = 0; k < g.ntheta(); ++k) {
      est[k] = (15 * u.values(e, k) - 10 * u.values(e1, k) + 3 * u.values(e2, k)) / 8;
      c += est[k];
    }
    c /= Real(g.ntheta());
    for (Index k = 0; k < g.ntheta(); ++k) dev = std::max(dev, std::abs(est[k] - c));
    return dev;
  };
  rep.trace_defect = trace_spread(g.nr() - 1, g.nr() - 2, g.nr() - 3);
  if (!g.is_disk()) rep.trace_defect = std::max(rep.trace_defect, trace_spread(0, 1, 2));

  rep.flux_defect = std::abs(boundary_flux(g, u, 0));
  if (!g.is_disk())
    rep.flux_defect = std::max(rep.flux_defect, std::abs(boundary_flux(g, u, 1)));

  const bool need_flux = which != WhichInequality::x_space;
  if (rep.mean_defect > Real(1e-8) * scale_u)
    rep.note = "mean is not zero";
  else if (rep.trace_defect > Real(1e-3) * scale_u)
    rep.note = "wall trace is not constant";
  else if (need_flux && rep.flux_defect > Real(5e-2) * scale_u)
    rep.note = "wall flux is not zero";
  rep.membership_ok = rep.note.empty();
  if (!rep.membership_ok) return rep;

  const Real uu = inner(g, u, u);
  const Real grad = dirichlet_energy(ctx, u, traces);
  if (which == WhichInequality::gradient_form) {
    ArrayRT lap;
    ctx.apply_operator(u.values, traces, lap);
    ScalarField lf(g);
    lf.values = lap;
    const Real lap2 = inner(g, lf, lf);
    rep.lhs = grad;
    rep.rhs = lap2 / lambda1;
  } else {
    rep.lhs = lambda1 * uu;
    rep.rhs = grad;
  }
  rep.defect = rep.rhs - rep.lhs;
  const Real scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  // A member of a split degenerate cluster satisfies its own sector relation,
  // up to lambda1_spread above the cluster minimum; admit exactly that slack
  // (the gradient form squares the eigenvalue, hence the correction factor).
  const Real slack = lambda1_spread * uu * (1 + lambda1_spread / lambda1);
  rep.equality = std::abs(rep.defect) <= tol * scale + slack;
  return rep;
}

Real subspace_angle(const Grid& g, const std::vector<ScalarField>& a,
                    const std::vector<ScalarField>& b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("subspace_angle: spans must be nonempty and equal-sized");
  auto orthonormal = [&](const std::vector<ScalarField>& in) {
    std::vector<ScalarField> q = in;
    for (size_t i = 0; i < q.size(); ++i) {
      for (size_t j = 0; j < i; ++j)
        q[i].values -= inner(g, q[j], q[i]) * q[j].values;
      const Real nrm = lp_norm(g, q[i], 2);
      if (nrm < Real(1e-12)) throw std::invalid_argument("subspace_angle: dependent span");
      q[i].values /= nrm;
    }
    return q;
  };
  const auto qa = orthonormal(a);
  const auto qb = orthonormal(b);
  Matrix C(qa.size(), qb.size());
  for (size_t i = 0; i < qa.size(); ++i)
    for (size_t j = 0; j < qb.size(); ++j)
      C(static_cast<Index>(i), static_cast<Index>(j)) = inner(g, qa[i], qb[j]);
  Eigen::JacobiSVD<Matrix> svd(C);
  const Real smin = std::clamp(svd.singularValues().minCoeff(), Real(-1), Real(1));
  return std::acos(smin);
}

}  // namespace vorstab
