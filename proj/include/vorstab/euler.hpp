#pragma once

// Vorticity dynamics on the disk and annulus: energy/enstrophy-conserving
// advection, RK4 time stepping with conserved circulations, the rotating-wave
// family, rotation-invariant orbit distances, and time-series bookkeeping.

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vorstab/elliptic.hpp"
#include "vorstab/types.hpp"

namespace vorstab {

struct SimConfig {
  CirculationVector gamma;    // boundary circulations, held exactly constant
  Real dt = 0;                // fixed step; 0 selects the CFL-derived step
  Real cfl = Real(0.5);       // fraction of the advective limit, in (0, 1]
  Real t_end = 1;
  Index snapshot_stride = 0;  // record every k-th step; 0 keeps endpoints only
  Real hyperdiffusion = 0;    // nu in the -nu * Delta^2 regularization
};

// Vorticity with its consistent stream solution. `stream` is refreshed after
// every accepted step, so psi and the traces always belong to `omega`.
struct SimState {
  Real t = 0;
  ScalarField omega;
  VcpSolution stream;
};

// One recorded snapshot of the conserved and diagnostic quantities.
struct SimRecord {
  Real t = 0;
  Real energy = 0;
  Real moment = 0;       // second radial moment of the vorticity
  Real mean = 0;
  Real enstrophy = 0;    // integral of omega^2
  Real m4 = 0;           // integral of omega^4
  Vector circulations;   // measured wall circulations, innermost first
  Real dist_ref = std::numeric_limits<Real>::quiet_NaN();
  Real orbit_dist = std::numeric_limits<Real>::quiet_NaN();
  Real orbit_angle = std::numeric_limits<Real>::quiet_NaN();
};

struct TimeSeries {
  std::vector<SimRecord> records;
  bool has_reference = false;
};

struct RunResult {
  TimeSeries series;
  SimState state;
  long steps = 0;
  Real dt_used = 0;
};

// Velocity (u_r, u_theta) of a stream function: the angular derivative is
// spectral, the radial one a centered difference with one-sided closures at
// the innermost and outermost rings.
std::pair<ScalarField, ScalarField> velocity(const EllipticContext& ctx,
                                             const ScalarField& psi);

// Advective tendency -u . grad(omega) as the metric-weighted Arakawa bracket
// of the self-consistent stream function, plus the optional hyperdiffusion.
// The result is mean-corrected so the vorticity integral is conserved exactly.
ScalarField tendency(const EllipticContext& ctx, const ScalarField& omega,
                     const CirculationVector& gamma, Real hyperdiffusion = 0);

// Largest advective step for the current velocity field: smallest cell width
// over largest speed. The caller scales it by the CFL fraction.
Real cfl_limit(const EllipticContext& ctx, const SimState& state);

SimState make_state(const EllipticContext& ctx, const ScalarField& omega,
                    const CirculationVector& gamma, Real t = 0);

// One classical RK4 step. Throws std::runtime_error naming the failure time
// if the update stops being finite.
void step(const EllipticContext& ctx, SimState& state,
          const CirculationVector& gamma, Real dt, Real hyperdiffusion = 0);

// Integrate omega0 to cfg.t_end. The step is cfg.dt when positive (rejected
// if it exceeds the advective limit), else cfl * limit measured at t = 0;
// either way it is trimmed so the final step lands exactly on t_end.
// `reference` adds the L^p distance column and, on the disk, the
// rotation-minimized orbit distance. `on_snapshot` sees the state and its
// freshly appended record at every recorded time.
RunResult run(
    const EllipticContext& ctx, const SimConfig& cfg, const ScalarField& omega0,
    const ScalarField* reference = nullptr, Real ref_p = 2,
    const std::function<void(const SimState&, const SimRecord&)>& on_snapshot = {});

// The exact rotating solution on the unit disk with angular velocity 1/n:
// a first-harmonic Bessel mode riding on a small uniform background.
ScalarField rotating_wave(const Grid& g, int n, Real t = 0);

// Rotate a field by alpha via the exact Fourier phase shift in theta.
ScalarField rotate_field(const Grid& g, const ScalarField& f, Real alpha);

struct OrbitDistance {
  Real distance = 0;
  Real angle = 0;  // minimizing rotation of the reference
};

// min over rotations alpha of ||f - rotate(reference, alpha)||_p, located by
// a 64-angle scan refined with golden-section search.
OrbitDistance orbit_distance(const Grid& g, const ScalarField& f,
                             const ScalarField& reference, Real p = 2);

// CSV exchange. Columns: t, E, I, one gamma column per wall, mean, enstrophy,
// m4, dist_ref_p, orbit_dist, orbit_angle; unset distances are written as nan.
void write_time_series(const std::string& path, const TimeSeries& series);
TimeSeries read_time_series(const std::string& path);

}  // namespace vorstab
