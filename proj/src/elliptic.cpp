#include "vorstab/elliptic.hpp"

#include <cmath>
#include <stdexcept>

namespace vorstab {

RadialOperator radial_operator(const Grid& g, Real m_sq, WallBc inner, WallBc outer) {
  const Index nr = g.nr();
  const Real dr = g.dr();
  RadialOperator op;
  op.sub.resize(nr - 1);
  op.sup.resize(nr - 1);
  op.diag.resize(nr);
  for (Index j = 0; j < nr; ++j) {
    const Real rj = g.r(j);
    const Real scale = Real(1) / (rj * dr * dr);
    Real d = m_sq / (rj * rj);
    if (j > 0) {
      const Real c = g.r_face(j) * scale;
      op.sub[j - 1] = -c;
      d += c;
    } else if (inner == WallBc::dirichlet) {
      d += Real(2) * g.r_face(0) * scale;  // zero at the disk center
    }
    if (j < nr - 1) {
      const Real c = g.r_face(j + 1) * scale;
      op.sup[j] = -c;
      d += c;
    } else if (outer == WallBc::dirichlet) {
      d += Real(2) * g.r_face(nr) * scale;
    }
    op.diag[j] = d;
  }
  return op;
}

TridiagFactor::TridiagFactor(const RadialOperator& op) {
  const Index n = op.diag.size();
  piv_.resize(n);
  mult_.resize(n - 1);
  sup_ = op.sup;
  piv_[0] = op.diag[0];
  for (Index j = 1; j < n; ++j) {
    if (piv_[j - 1] == Real(0)) throw std::runtime_error("tridiag factor: zero pivot");
    mult_[j - 1] = op.sub[j - 1] / piv_[j - 1];
    piv_[j] = op.diag[j] - mult_[j - 1] * op.sup[j - 1];
  }
  if (piv_[n - 1] == Real(0)) throw std::runtime_error("tridiag factor: zero pivot");
}

namespace {

template <typename Vec>
void thomas_solve(const Vector& piv, const Vector& mult, const Vector& sup, Vec& d) {
  const Index n = piv.size();
  for (Index j = 1; j < n; ++j) d[j] -= mult[j - 1] * d[j - 1];
  d[n - 1] /= piv[n - 1];
  for (Index j = n - 2; j >= 0; --j) d[j] = (d[j] - sup[j] * d[j + 1]) / piv[j];
}

void tridiag_multiply(const RadialOperator& op, const Eigen::VectorXcd& u, Eigen::VectorXcd& y) {
  const Index n = op.diag.size();
  y.resize(n);
  for (Index j = 0; j < n; ++j) {
    Complex s = op.diag[j] * u[j];
    if (j > 0) s += op.sub[j - 1] * u[j - 1];
    if (j < n - 1) s += op.sup[j] * u[j + 1];
    y[j] = s;
  }
}

Real inner_radial(const Grid& g, const Vector& profile, const ArrayRT& v) {
  const Vector w = g.ring_measure();
  return (w.array() * profile.array() * v.rowwise().sum()).sum();
}

void add_radial(ArrayRT& field, const Vector& profile, Real coeff) {
  field.colwise() += coeff * profile.array();
}

Real weighted_mean(const Grid& g, const ArrayRT& v) {
  return (g.ring_measure().array() * v.rowwise().sum()).sum() / g.total_measure();
}

}  // namespace

void TridiagFactor::solve_in_place(Vector& d) const { thomas_solve(piv_, mult_, sup_, d); }
void TridiagFactor::solve_in_place(Eigen::VectorXcd& d) const { thomas_solve(piv_, mult_, sup_, d); }

EllipticContext::EllipticContext(const Grid& g) : grid_(g), fft_(g.ntheta()) {
  const Index nm = g.ntheta() / 2 + 1;
  mode_.reserve(nm);
  ops_.reserve(nm);
  for (Index m = 0; m < nm; ++m) {
    ops_.push_back(radial_operator(g, Real(m) * Real(m), WallBc::dirichlet, WallBc::dirichlet));
    mode_.emplace_back(ops_.back());
  }
  if (!g.is_disk()) {
    // Harmonic measure of the inner wall: A_0 zeta = lift of unit inner trace.
    Vector rhs = Vector::Zero(g.nr());
    rhs[0] = Real(2) * g.r_face(0) / (g.r(0) * g.dr() * g.dr());
    zeta_ = rhs;
    mode_[0].solve_in_place(zeta_);
    // p11 = B(zeta, zeta) with traces (0 outer, 1 inner), radial profile only.
    const Real dr = g.dr();
    Real b = g.r_face(0) * (zeta_[0] - Real(1)) * (zeta_[0] - Real(1)) / (dr / 2);
    for (Index j = 1; j < g.nr(); ++j) {
      const Real d = zeta_[j] - zeta_[j - 1];
      b += g.r_face(j) * d * d / dr;
    }
    b += g.r_face(g.nr()) * zeta_[g.nr() - 1] * zeta_[g.nr() - 1] / (dr / 2);
    p11_ = b * g.dtheta() * Real(g.ntheta());
    q11_ = Real(1) / p11_;
  }
}

void EllipticContext::dirichlet_solve(const ArrayRT& v, ArrayRT& u) const {
  ArrayRTc spec;
  fft_.forward(v, spec);
  Eigen::VectorXcd col;
  for (Index m = 0; m < spec.cols(); ++m) {
    col = spec.col(m).matrix();
    mode_[m].solve_in_place(col);
    spec.col(m) = col.array();
  }
  fft_.inverse(spec, u);
}

Vector EllipticContext::solve_mode0(const Vector& rhs) const {
  Vector u = rhs;
  mode_[0].solve_in_place(u);
  return u;
}

void EllipticContext::apply_operator(const ArrayRT& u, const Vector& traces, ArrayRT& out) const {
  const Grid& g = grid_;
  if (traces.size() != g.n_boundaries())
    throw std::invalid_argument("apply_operator: traces size mismatch");
  ArrayRTc spec;
  fft_.forward(u, spec);
  Eigen::VectorXcd col, y;
  for (Index m = 0; m < spec.cols(); ++m) {
    col = spec.col(m).matrix();
    tridiag_multiply(ops_[m], col, y);
    spec.col(m) = y.array();
  }
  // Constant traces enter the mode-0 right-hand side only.
  const Real dr = g.dr();
  const Real lift_out = Real(2) * g.r_face(g.nr()) / (g.r(g.nr() - 1) * dr * dr);
  spec(g.nr() - 1, 0) -= Real(g.ntheta()) * lift_out * traces[0];
  if (!g.is_disk()) {
    const Real lift_in = Real(2) * g.r_face(0) / (g.r(0) * dr * dr);
    spec(0, 0) -= Real(g.ntheta()) * lift_in * traces[1];
  }
  fft_.inverse(spec, out);
}

Real EllipticContext::theta_energy(const ArrayRT& u) const {
  const Grid& g = grid_;
  ArrayRTc spec;
  fft_.forward(u, spec);
  const Index n = g.ntheta();
  Real total = 0;
  for (Index j = 0; j < g.nr(); ++j) {
    Real s = 0;
    for (Index m = 1; m < spec.cols(); ++m) {
      const Real pair = (m == n / 2) ? Real(1) : Real(2);  // conjugate partner
      s += pair * Real(m) * Real(m) * std::norm(spec(j, m));
    }
    total += s * g.dr() * g.dtheta() / (g.r(j) * Real(n));
  }
  return total;
}

ScalarField dirichlet_solve(const EllipticContext& ctx, const ScalarField& v) {
  require_match(ctx.grid(), v, "dirichlet_solve");
  ScalarField u(ctx.grid());
  ctx.dirichlet_solve(v.values, u.values);
  return u;
}

ScalarField apply_P(const EllipticContext& ctx, const ScalarField& v) {
  require_match(ctx.grid(), v, "apply_P");
  ScalarField u(ctx.grid());
  ctx.dirichlet_solve(v.values, u.values);
  if (!ctx.grid().is_disk()) {
    const Real proj = inner_radial(ctx.grid(), ctx.zeta(), v.values);
    add_radial(u.values, ctx.zeta(), ctx.q11() * proj);
  }
  return u;
}

ScalarField h_gamma(const EllipticContext& ctx, const CirculationVector& gamma) {
  const Grid& g = ctx.grid();
  if (gamma.size() != g.n_boundaries() - 1)
    throw std::invalid_argument("h_gamma: one circulation per inner wall");
  ScalarField f(g);
  if (!g.is_disk()) add_radial(f.values, ctx.zeta(), -ctx.q11() * gamma[0]);
  return f;
}

ScalarField apply_T(const EllipticContext& ctx, const ScalarField& v) {
  require_match(ctx.grid(), v, "apply_T");
  const Real m0 = mean(ctx.grid(), v);
  const Real scale = std::max(Real(1), v.values.abs().maxCoeff());
  if (std::abs(m0) > Real(1e-10) * scale)
    throw std::invalid_argument("apply_T: input is not mean-zero");
  ScalarField u = apply_P(ctx, v);
  u.values -= weighted_mean(ctx.grid(), u.values);
  return u;
}

VcpSolution solve_vcp(const EllipticContext& ctx, const ScalarField& omega,
                      const CirculationVector& gamma) {
  const Grid& g = ctx.grid();
  require_match(g, omega, "solve_vcp");
  if (gamma.size() != g.n_boundaries() - 1)
    throw std::invalid_argument("solve_vcp: one circulation per inner wall");
  VcpSolution s;
  s.psi.a = g.a();
  ctx.dirichlet_solve(omega.values, s.psi.values);
  Real inner_trace = 0;
  if (!g.is_disk()) {
    const Real beta = ctx.q11() * (inner_radial(g, ctx.zeta(), omega.values) - gamma[0]);
    add_radial(s.psi.values, ctx.zeta(), beta);
    inner_trace = beta;
  }
  const Real shift = weighted_mean(g, s.psi.values);
  s.psi.values -= shift;
  s.traces.resize(g.n_boundaries());
  s.traces[0] = -shift;
  if (!g.is_disk()) s.traces[1] = inner_trace - shift;
  return s;
}

Real boundary_flux(const Grid& g, const ScalarField& u, int wall) {
  require_match(g, u, "boundary_flux");
  const Index nr = g.nr();
  const Real dr = g.dr();
  Real total = 0;
  if (wall == 0) {
    for (Index k = 0; k < g.ntheta(); ++k) {
      const Real du = (Real(2) * u.values(nr - 1, k) - Real(3) * u.values(nr - 2, k) +
                       u.values(nr - 3, k)) /
                      dr;
      total += du * g.r_face(nr) * g.dtheta();
    }
  } else if (wall == 1 && !g.is_disk()) {
    for (Index k = 0; k < g.ntheta(); ++k) {
      const Real du = (Real(2) * u.values(0, k) - Real(3) * u.values(1, k) +
                       u.values(2, k)) /
                      dr;
      total += du * g.r_face(0) * g.dtheta();
    }
  } else {
    throw std::invalid_argument("boundary_flux: no such wall");
  }
  return total;
}

Real natural_flux(const Grid& g, const ScalarField& u, const Vector& traces, int wall) {
  require_match(g, u, "natural_flux");
  if (traces.size() != g.n_boundaries())
    throw std::invalid_argument("natural_flux: traces size mismatch");
  const Real half = g.dr() / 2;
  Real total = 0;
  if (wall == 0) {
    for (Index k = 0; k < g.ntheta(); ++k)
      total += g.r_face(g.nr()) * (traces[0] - u.values(g.nr() - 1, k)) / half * g.dtheta();
  } else if (wall == 1 && !g.is_disk()) {
    for (Index k = 0; k < g.ntheta(); ++k)
      total -= g.r_face(0) * (u.values(0, k) - traces[1]) / half * g.dtheta();
  } else {
    throw std::invalid_argument("natural_flux: no such wall");
  }
  return total;
}

Real dirichlet_energy(const EllipticContext& ctx, const ScalarField& u, const Vector& traces) {
  const Grid& g = ctx.grid();
  require_match(g, u, "dirichlet_energy");
  if (traces.size() != g.n_boundaries())
    throw std::invalid_argument("dirichlet_energy: traces size mismatch");
  const Real dr = g.dr();
  Real b = 0;
  for (Index k = 0; k < g.ntheta(); ++k) {
    for (Index j = 1; j < g.nr(); ++j) {
      const Real d = u.values(j, k) - u.values(j - 1, k);
      b += g.r_face(j) * d * d / dr;
    }
    const Real dout = traces[0] - u.values(g.nr() - 1, k);
    b += g.r_face(g.nr()) * dout * dout / (dr / 2);
    if (!g.is_disk()) {
      const Real din = u.values(0, k) - traces[1];
      b += g.r_face(0) * din * din / (dr / 2);
    }
  }
  return b * g.dtheta() + ctx.theta_energy(u.values);
}

RayleighReport rayleigh_quotient(const EllipticContext& ctx, const ScalarField& u,
                                 const Vector& traces) {
  const Grid& g = ctx.grid();
  RayleighReport rep;
  rep.traces = traces;
  rep.mean = mean(g, u);
  const Real denom = inner(g, u, u);
  if (denom == Real(0)) throw std::invalid_argument("rayleigh_quotient: zero field");
  rep.quotient = dirichlet_energy(ctx, u, traces) / denom;
  return rep;
}

RayleighReport rayleigh_quotient(const EllipticContext& ctx, const ScalarField& u) {
  const Grid& g = ctx.grid();
  require_match(g, u, "rayleigh_quotient");
  // Quadratic extrapolation of each wall trace from the nearest three rings.
  Vector traces(g.n_boundaries());
  Real defect = 0;
  const Index nr = g.nr();
  auto estimate = [&](Index e, Index e1, Index e2) {
    Real sum = 0;
    Vector est(g.ntheta());
    for (Index k = 0; k < g.ntheta(); ++k) {
      est[k] = (Real(15) * u.values(e, k) - Real(10) * u.values(e1, k) +
                Real(3) * u.values(e2, k)) /
               Real(8);
      sum += est[k];
    }
    const Real c = sum / Real(g.ntheta());
    for (Index k = 0; k < g.ntheta(); ++k) defect = std::max(defect, std::abs(est[k] - c));
    return c;
  };
  traces[0] = estimate(nr - 1, nr - 2, nr - 3);
  if (!g.is_disk()) traces[1] = estimate(0, 1, 2);
  RayleighReport rep = rayleigh_quotient(ctx, u, traces);
  rep.trace_defect = defect;
  return rep;
}

Real energy(const EllipticContext& ctx, const ScalarField& omega,
            const CirculationVector& gamma) {
  const Grid& g = ctx.grid();
  require_match(g, omega, "energy");
  if (gamma.size() != g.n_boundaries() - 1)
    throw std::invalid_argument("energy: one circulation per inner wall");
  const ScalarField p = apply_P(ctx, omega);
  Real e = Real(0.5) * inner(g, omega, p);
  if (!g.is_disk()) {
    const ScalarField h = h_gamma(ctx, gamma);
    e += inner(g, h, omega);
    e += Real(0.5) * ctx.q11() * gamma[0] * gamma[0];
  }
  return e;
}

}  // namespace vorstab
