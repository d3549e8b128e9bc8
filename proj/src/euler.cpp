#include "vorstab/euler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vorstab/bessel.hpp"

namespace vorstab {

namespace {

// Interior data framed by one ghost ring on each side; theta stays periodic
// through index wrapping. Padded row j+1 holds interior ring j.
//
// Pole ghost: the cell centers straddle r = 0, so the ring "below" r_0 is
// ring 0 itself seen from the other side, pad(0,k) = v(0, k + ntheta/2).
// That identification is exact for cell-centered data, no parity assumption.
//
// Wall ghosts extrapolate quadratically. For the stream function the wall
// trace is known data, so the parabola interpolates the two last rings plus
// the trace at the wall; for the vorticity nothing is prescribed and the
// parabola uses the last three rings.
ArrayRT pad_stream(const Grid& g, const ArrayRT& psi, const Vector& traces) {
  const Index nr = g.nr(), nt = g.ntheta();
  ArrayRT p(nr + 2, nt);
  p.middleRows(1, nr) = psi;
  p.row(nr + 1) =
      psi.row(nr - 2) / 3 - 2 * psi.row(nr - 1) + Real(8) / 3 * traces[0];
  if (g.is_disk()) {
    const Index half = nt / 2;
    for (Index k = 0; k < nt; ++k) p(0, k) = psi(0, (k + half) % nt);
  } else {
    p.row(0) = psi.row(1) / 3 - 2 * psi.row(0) + Real(8) / 3 * traces[1];
  }
  return p;
}

ArrayRT pad_vorticity(const Grid& g, const ArrayRT& w) {
  const Index nr = g.nr(), nt = g.ntheta();
  ArrayRT p(nr + 2, nt);
  p.middleRows(1, nr) = w;
  p.row(nr + 1) = 3 * w.row(nr - 1) - 3 * w.row(nr - 2) + w.row(nr - 3);
  if (g.is_disk()) {
    const Index half = nt / 2;
    for (Index k = 0; k < nt; ++k) p(0, k) = w(0, (k + half) % nt);
  } else {
    p.row(0) = 3 * w.row(0) - 3 * w.row(1) + w.row(2);
  }
  return p;
}

// Arakawa's three-bracket average on the padded stencil. The plain centered
// bracket J1 plus the two staggered forms J2, J3; their mean conserves the
// quadratic invariants of the advection on a uniform grid, and the polar
// metric enters only through the 1/r weight applied by the caller.
ArrayRT arakawa(const Grid& g, const ArrayRT& P, const ArrayRT& Q) {
  const Index nr = g.nr(), nt = g.ntheta();
  ArrayRT out(nr, nt);
  const Real scale = 1 / (12 * g.dr() * g.dtheta());  // 3 * 4 dr dtheta
  for (Index k = 0; k < nt; ++k) {
    const Index kp = (k + 1) % nt, km = (k + nt - 1) % nt;
    for (Index j = 0; j < nr; ++j) {
      const Index c = j + 1, up = j + 2, dn = j;
      const Real j1 = (P(up, k) - P(dn, k)) * (Q(c, kp) - Q(c, km)) -
                      (P(c, kp) - P(c, km)) * (Q(up, k) - Q(dn, k));
      const Real j2 = P(up, k) * (Q(up, kp) - Q(up, km)) -
                      P(dn, k) * (Q(dn, kp) - Q(dn, km)) -
                      P(c, kp) * (Q(up, kp) - Q(dn, kp)) +
                      P(c, km) * (Q(up, km) - Q(dn, km));
      const Real j3 = P(up, kp) * (Q(c, kp) - Q(up, k)) -
                      P(dn, km) * (Q(dn, k) - Q(c, km)) -
                      P(dn, kp) * (Q(c, kp) - Q(dn, k)) +
                      P(up, km) * (Q(up, k) - Q(c, km));
      out(j, k) = (j1 + j2 + j3) * scale;
    }
  }
  return out;
}

// y += op x for one angular mode, complex data over the real tridiagonal.
void tridiag_apply(const RadialOperator& op, const Eigen::VectorXcd& x,
                   Eigen::VectorXcd& y) {
  const Index n = op.diag.size();
  for (Index j = 0; j < n; ++j) {
    Complex v = op.diag[j] * x[j];
    if (j > 0) v += op.sub[j - 1] * x[j - 1];
    if (j + 1 < n) v += op.sup[j] * x[j + 1];
    y[j] = v;
  }
}

// nu (-lap)^2 omega with zero-flux walls: mean-conserving and dissipative.
void add_hyperdiffusion(const EllipticContext& ctx, const ScalarField& omega,
                        Real nu, ArrayRT& tend) {
  const Grid& g = ctx.grid();
  ArrayRTc spec;
  ctx.fft().forward(omega.values, spec);
  Eigen::VectorXcd x(g.nr()), y(g.nr());
  for (Index m = 0; m < spec.cols(); ++m) {
    const RadialOperator op = radial_operator(
        g, Real(m) * Real(m), WallBc::zero_flux, WallBc::zero_flux);
    x = spec.col(m).matrix();
    tridiag_apply(op, x, y);
    tridiag_apply(op, y, x);
    spec.col(m) = x.array();
  }
  ArrayRT lap2;
  ctx.fft().inverse(spec, lap2);
  tend -= nu * lap2;
}

ArrayRT advective_tendency(const EllipticContext& ctx, const ScalarField& omega,
                           const VcpSolution& stream) {
  const Grid& g = ctx.grid();
  const ArrayRT P = pad_stream(g, stream.psi.values, stream.traces);
  const ArrayRT Q = pad_vorticity(g, omega.values);
  ArrayRT out = arakawa(g, P, Q);
  for (Index j = 0; j < g.nr(); ++j) out.row(j) /= g.r(j);
  // Exact mean correction: the bracket only conserves the vorticity integral
  // up to its wall closures, so project the defect out before stepping.
  Real total = 0;
  for (Index j = 0; j < g.nr(); ++j) total += out.row(j).sum() * g.cell_measure(j);
  out -= total / g.total_measure();
  return out;
}

ScalarField tendency_with(const EllipticContext& ctx, const ScalarField& omega,
                          const VcpSolution& stream, Real nu) {
  ScalarField out(ctx.grid());
  out.values = advective_tendency(ctx, omega, stream);
  if (nu > 0) add_hyperdiffusion(ctx, omega, nu, out.values);
  return out;
}

Real lp_distance(const Grid& g, const ScalarField& f, const ScalarField& ref,
                 Real p) {
  ScalarField diff(g);
  diff.values = f.values - ref.values;
  return lp_norm(g, diff, p);
}

}  // namespace

std::pair<ScalarField, ScalarField> velocity(const EllipticContext& ctx,
                                             const ScalarField& psi) {
  const Grid& g = ctx.grid();
  require_match(g, psi, "velocity");
  ScalarField ur(g), ut(g);
  ctx.fft().derivative_theta(psi.values, ur.values);
  ur.values.colwise() /= g.radii().array();

  const Index nr = g.nr();
  const Real h2 = 2 * g.dr();
  ut.values.row(0) =
      -(-3 * psi.values.row(0) + 4 * psi.values.row(1) - psi.values.row(2)) / h2;
  for (Index j = 1; j + 1 < nr; ++j)
    ut.values.row(j) = -(psi.values.row(j + 1) - psi.values.row(j - 1)) / h2;
  ut.values.row(nr - 1) = -(3 * psi.values.row(nr - 1) -
                            4 * psi.values.row(nr - 2) + psi.values.row(nr - 3)) /
                          h2;
  return {std::move(ur), std::move(ut)};
}

ScalarField tendency(const EllipticContext& ctx, const ScalarField& omega,
                     const CirculationVector& gamma, Real hyperdiffusion) {
  require_match(ctx.grid(), omega, "tendency");
  const VcpSolution stream = solve_vcp(ctx, omega, gamma);
  return tendency_with(ctx, omega, stream, hyperdiffusion);
}

Real cfl_limit(const EllipticContext& ctx, const SimState& state) {
  const Grid& g = ctx.grid();
  auto [ur, ut] = velocity(ctx, state.stream.psi);
  const Real vmax = std::max(ur.values.abs().maxCoeff(), ut.values.abs().maxCoeff());
  const Real width = std::min(g.dr(), g.r(0) * g.dtheta());
  return width / std::max(vmax, Real(1e-14));
}

SimState make_state(const EllipticContext& ctx, const ScalarField& omega,
                    const CirculationVector& gamma, Real t) {
  require_match(ctx.grid(), omega, "make_state");
  if (!omega.values.allFinite())
    throw std::invalid_argument("make_state: vorticity is not finite");
  SimState s;
  s.t = t;
  s.omega = omega;
  s.stream = solve_vcp(ctx, omega, gamma);
  return s;
}

void step(const EllipticContext& ctx, SimState& state,
          const CirculationVector& gamma, Real dt, Real hyperdiffusion) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  const Grid& g = ctx.grid();
  const Real nu = hyperdiffusion;

  const ScalarField k1 = tendency_with(ctx, state.omega, state.stream, nu);
  ScalarField w(g);
  w.values = state.omega.values + (dt / 2) * k1.values;
  const ScalarField k2 = tendency(ctx, w, gamma, nu);
  w.values = state.omega.values + (dt / 2) * k2.values;
  const ScalarField k3 = tendency(ctx, w, gamma, nu);
  w.values = state.omega.values + dt * k3.values;
  const ScalarField k4 = tendency(ctx, w, gamma, nu);

  state.omega.values +=
      (dt / 6) * (k1.values + 2 * k2.values + 2 * k3.values + k4.values);
  state.t += dt;
  if (!state.omega.values.allFinite())
    throw std::runtime_error(
        "step: vorticity became non-finite at t = " + std::to_string(state.t));
  state.stream = solve_vcp(ctx, state.omega, gamma);
}

namespace {

SimRecord make_record(const EllipticContext& ctx, const SimState& state,
                      const CirculationVector& gamma, const ScalarField* reference,
                      Real ref_p) {
  const Grid& g = ctx.grid();
  SimRecord rec;
  rec.t = state.t;
  rec.energy = energy(ctx, state.omega, gamma);
  rec.moment = moment_of_inertia(g, state.omega);
  rec.mean = mean(g, state.omega);
  ScalarField sq(g);
  sq.values = state.omega.values.square();
  rec.enstrophy = integrate(g, sq);
  sq.values = sq.values.square();
  rec.m4 = integrate(g, sq);
  rec.circulations.resize(g.n_boundaries());
  for (Index w = 0; w < g.n_boundaries(); ++w)
    rec.circulations[w] = -natural_flux(g, state.stream.psi,
                                        state.stream.traces, static_cast<int>(w));
  if (reference) {
    rec.dist_ref = lp_distance(g, state.omega, *reference, ref_p);
    if (g.is_disk()) {
      const OrbitDistance od = orbit_distance(g, state.omega, *reference, ref_p);
      rec.orbit_dist = od.distance;
      rec.orbit_angle = od.angle;
    }
  }
  return rec;
}

}  // namespace

RunResult run(
    const EllipticContext& ctx, const SimConfig& cfg, const ScalarField& omega0,
    const ScalarField* reference, Real ref_p,
    const std::function<void(const SimState&, const SimRecord&)>& on_snapshot) {
  if (!(cfg.t_end > 0)) throw std::invalid_argument("run: t_end must be positive");
  if (!(cfg.cfl > 0) || cfg.cfl > 1)
    throw std::invalid_argument("run: cfl must lie in (0, 1]");
  if (cfg.dt < 0 || cfg.snapshot_stride < 0 || cfg.hyperdiffusion < 0)
    throw std::invalid_argument("run: negative step, stride, or viscosity");
  if (reference) require_match(ctx.grid(), *reference, "run reference");

  RunResult res;
  res.state = make_state(ctx, omega0, cfg.gamma);

  const Real limit = cfl_limit(ctx, res.state);
  Real dt = cfg.dt;
  if (dt > 0) {
    if (dt > limit * (1 + Real(1e-9)))
      throw std::invalid_argument("run: fixed dt exceeds the advective limit");
  } else {
    dt = cfg.cfl * limit;
  }
  const long n = std::max(1L, static_cast<long>(std::ceil(cfg.t_end / dt - Real(1e-12))));
  res.dt_used = cfg.t_end / Real(n);
  res.series.has_reference = reference != nullptr;

  auto record = [&](const SimState& s) {
    res.series.records.push_back(make_record(ctx, s, cfg.gamma, reference, ref_p));
    if (on_snapshot) on_snapshot(s, res.series.records.back());
  };
  record(res.state);
  for (long i = 1; i <= n; ++i) {
    step(ctx, res.state, cfg.gamma, res.dt_used, cfg.hyperdiffusion);
    // Exact snapshot times: the accumulated t drifts by roundoff only, but
    // pin the final time so series always end exactly at t_end.
    if (i == n) res.state.t = cfg.t_end;
    if (i == n || (cfg.snapshot_stride > 0 && i % cfg.snapshot_stride == 0))
      record(res.state);
  }
  res.steps = n;
  return res;
}

ScalarField rotating_wave(const Grid& g, int n, Real t) {
  if (!g.is_disk())
    throw std::invalid_argument("rotating_wave: defined on the disk only");
  if (n < 1) throw std::invalid_argument("rotating_wave: n must be positive");
  const Real phase = t / Real(n);
  const Real lift = Real(2) / Real(n);
  return sample_with(g, [&](Real r, Real theta) {
    return bessel_j(1, j1_zero1 * r) * std::cos(theta - phase) + lift;
  });
}

ScalarField rotate_field(const Grid& g, const ScalarField& f, Real alpha) {
  require_match(g, f, "rotate_field");
  SpectralTheta fft(g.ntheta());
  ScalarField out(g);
  // SpectralTheta::rotate advances the argument; rotating the pattern by
  // alpha means evaluating at theta - alpha.
  fft.rotate(f.values, -alpha, out.values);
  return out;
}

OrbitDistance orbit_distance(const Grid& g, const ScalarField& f,
                             const ScalarField& reference, Real p) {
  require_match(g, f, "orbit_distance");
  require_match(g, reference, "orbit_distance reference");
  if (!(p >= 1)) throw std::invalid_argument("orbit_distance: p must be >= 1");

  SpectralTheta fft(g.ntheta());
  ScalarField rotated(g);
  auto dist_at = [&](Real alpha) {
    fft.rotate(reference.values, -alpha, rotated.values);
    return lp_distance(g, f, rotated, p);
  };

  constexpr int n_scan = 64;
  const Real step_a = 2 * pi / n_scan;
  Real best = dist_at(0), best_alpha = 0;
  for (int i = 1; i < n_scan; ++i) {
    const Real d = dist_at(i * step_a);
    if (d < best) {
      best = d;
      best_alpha = i * step_a;
    }
  }

  // Golden-section refinement on the bracketing pair of scan intervals.
  const Real gr = (std::sqrt(Real(5)) - 1) / 2;
  Real lo = best_alpha - step_a, hi = best_alpha + step_a;
  Real x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  Real f1 = dist_at(x1), f2 = dist_at(x2);
  for (int it = 0; it < 80 && hi - lo > Real(1e-12); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = dist_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = dist_at(x2);
    }
  }
  const Real mid = (lo + hi) / 2;
  const Real dmid = dist_at(mid);

  OrbitDistance out;
  out.distance = std::min(dmid, best);
  out.angle = dmid <= best ? mid : best_alpha;
  out.angle = std::fmod(out.angle + 4 * pi, 2 * pi);
  return out;
}

void write_time_series(const std::string& path, const TimeSeries& series) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_time_series: cannot open " + path);
  const Index n_gamma =
      series.records.empty() ? 1 : series.records.front().circulations.size();
  std::fprintf(fp, "t,E,I");
  for (Index w = 0; w < n_gamma; ++w)
    std::fprintf(fp, ",gamma%lld", static_cast<long long>(w));
  std::fprintf(fp, ",mean,enstrophy,m4,dist_ref_p,orbit_dist,orbit_angle\n");
  for (const SimRecord& r : series.records) {
    std::fprintf(fp, "%.17g,%.17g,%.17g", r.t, r.energy, r.moment);
    for (Index w = 0; w < r.circulations.size(); ++w)
      std::fprintf(fp, ",%.17g", r.circulations[w]);
    std::fprintf(fp, ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.mean,
                 r.enstrophy, r.m4, r.dist_ref, r.orbit_dist, r.orbit_angle);
  }
  if (std::fclose(fp) != 0)
    throw std::runtime_error("write_time_series: close failed for " + path);
}

TimeSeries read_time_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_time_series: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,E,I", 0) != 0)
    throw std::runtime_error("read_time_series: missing header in " + path);
  Index n_gamma = 0;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ','))
      if (col.rfind("gamma", 0) == 0) ++n_gamma;
  }
  TimeSeries out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<Real> v;
    while (std::getline(ss, cell, ','))
      v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != static_cast<size_t>(9 + n_gamma))
      throw std::runtime_error("read_time_series: malformed row in " + path);
    SimRecord r;
    r.t = v[0];
    r.energy = v[1];
    r.moment = v[2];
    r.circulations.resize(n_gamma);
    for (Index w = 0; w < n_gamma; ++w) r.circulations[w] = v[3 + w];
    const size_t b = 3 + n_gamma;
    r.mean = v[b];
    r.enstrophy = v[b + 1];
    r.m4 = v[b + 2];
    r.dist_ref = v[b + 3];
    r.orbit_dist = v[b + 4];
    r.orbit_angle = v[b + 5];
    if (!out.records.empty() && !(r.t > out.records.back().t))
      throw std::runtime_error("read_time_series: timestamps not increasing in " +
                               path);
    out.records.push_back(std::move(r));
    if (!std::isnan(out.records.back().dist_ref)) out.has_reference = true;
  }
  return out;
}

}  // namespace vorstab
