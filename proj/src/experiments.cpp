#include "vorstab/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vorstab/bessel.hpp"
#include "vorstab/rearrange.hpp"
#include "vorstab/spectra.hpp"

namespace vorstab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

ScalarField subcritical_steady(const Grid& g) {
  return sample_with(g, [](Real r, Real) { return bessel_j(0, j0_zero1 * r); });
}

ScalarField critical_steady(const Grid& g) {
  return sample_with(
      g, [](Real r, Real th) { return bessel_j(1, j1_zero1 * r) * std::cos(th); });
}

// Radial profile vanishing at both annulus walls; any radial field is a
// steady state, this one just keeps the induced shear mild.
ScalarField annulus_steady(const Grid& g) {
  const Real a = g.a();
  return sample_with(
      g, [a](Real r, Real) { return std::sin(pi * (r - a) / (1 - a)); });
}

Real lp_dist(const Grid& g, const ScalarField& f, const ScalarField& h, Real p) {
  ScalarField d(g);
  d.values = f.values - h.values;
  return lp_norm(g, d, p);
}

// Stride giving on the order of 200 records for the configured run.
Index pick_stride(const EllipticContext& ctx, const SimConfig& cfg,
                  const ScalarField& w0) {
  if (cfg.snapshot_stride > 0) return cfg.snapshot_stride;
  SimState probe = make_state(ctx, w0, cfg.gamma);
  const Real dt = cfg.dt > 0 ? cfg.dt : cfg.cfl * cfl_limit(ctx, probe);
  const long n = static_cast<long>(std::ceil(cfg.t_end / dt));
  return std::max<Index>(1, n / 200);
}

// Generic small CSV: one header line of column names, numeric rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Real>> rows;
  std::vector<std::string> comments;  // leading `# key=value` lines

  Index col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<Index>(i);
    throw std::runtime_error("table: no column named " + name);
  }
};

void write_table(const std::string& path, const Table& t) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_table: cannot open " + path);
  for (const auto& c : t.comments) std::fprintf(fp, "# %s\n", c.c_str());
  for (size_t i = 0; i < t.columns.size(); ++i)
    std::fprintf(fp, "%s%s", i ? "," : "", t.columns[i].c_str());
  std::fprintf(fp, "\n");
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      std::fprintf(fp, "%s%.17g", i ? "," : "", row[i]);
    std::fprintf(fp, "\n");
  }
  if (std::fclose(fp) != 0)
    throw std::runtime_error("write_table: close failed for " + path);
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_table: cannot open " + path);
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      t.comments.push_back(line.substr(2));
      continue;
    }
    if (t.columns.empty()) {
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) t.columns.push_back(c);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<Real> row;
    while (std::getline(ss, cell, ','))
      row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.columns.size())
      throw std::runtime_error("read_table: ragged row in " + path);
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty())
    throw std::runtime_error("read_table: no header in " + path);
  return t;
}

Real comment_value(const Table& t, const std::string& key) {
  for (const auto& c : t.comments) {
    auto pos = c.find(key + "=");
    if (pos != std::string::npos)
      return std::strtod(c.c_str() + pos + key.size() + 1, nullptr);
  }
  throw std::runtime_error("table: no comment value for " + key);
}

void append_output(ExperimentReport& rep, const std::string& path) {
  rep.outputs.push_back(path);
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  static const std::vector<std::string> names = {"stability", "rotating-wave",
                                                 "structural", "rigidity"};
  if (std::find(names.begin(), names.end(), spec.name) == names.end())
    throw std::invalid_argument("experiment: unknown name " + spec.name);
  if (spec.deltas.empty())
    throw std::invalid_argument("experiment: amplitude ladder is empty");
  for (size_t i = 0; i < spec.deltas.size(); ++i) {
    if (!(spec.deltas[i] > 0))
      throw std::invalid_argument("experiment: amplitudes must be positive");
    if (i > 0 && !(spec.deltas[i] < spec.deltas[i - 1]))
      throw std::invalid_argument("experiment: amplitudes must decrease");
  }
  if (!(spec.horizon > 0))
    throw std::invalid_argument("experiment: horizon must be positive");
  if (!(spec.p >= 1)) throw std::invalid_argument("experiment: p must be >= 1");
  if (!(spec.response_factor > 0))
    throw std::invalid_argument("experiment: response factor must be positive");
  if (spec.out_dir.empty())
    throw std::invalid_argument("experiment: output directory required");
  if (spec.name == "rotating-wave" && spec.wave_ns.empty())
    throw std::invalid_argument("experiment: wave n list is empty");
  if (spec.name == "rigidity" && spec.n_seeds < 1)
    throw std::invalid_argument("experiment: need at least one ascent seed");
}

bool ExperimentReport::all_pass() const {
  for (const auto& c : criteria)
    if (!c.pass || c.invalid) return false;
  return true;
}

bool ExperimentReport::any_invalid() const {
  for (const auto& c : criteria)
    if (c.invalid) return true;
  return false;
}

int ExperimentReport::exit_code() const {
  if (any_invalid()) return 3;
  return all_pass() ? 0 : 2;
}

ScalarField random_perturbation(const EllipticContext& ctx, SplitMix64& rng,
                                int n_ang, int n_rad) {
  const Grid& g = ctx.grid();
  ScalarField out(g);
  Vector cosm(g.ntheta()), sinm(g.ntheta());
  for (Index m = 0; m < n_ang; ++m) {
    const SectorModes modes = sector_dirichlet_modes(g, m, n_rad);
    for (Index k = 0; k < g.ntheta(); ++k) {
      cosm[k] = std::cos(Real(m) * g.theta(k));
      sinm[k] = std::sin(Real(m) * g.theta(k));
    }
    for (int kk = 0; kk < n_rad; ++kk) {
      const Real c = rng.symmetric();
      const Real s = m >= 1 ? rng.symmetric() : Real(0);
      for (Index k = 0; k < g.ntheta(); ++k) {
        const Real w = c * cosm[k] + s * sinm[k];
        if (w != 0)
          out.values.col(k) += w * modes.profiles.col(kk).array();
      }
    }
  }
  out.values -= mean(g, out);
  const Real norm = lp_norm(g, out, 2);
  if (norm > 0) out.values /= norm;
  return out;
}

CriterionResult assess_conservation(const std::string& series_csv,
                                    Real drift_tol, Real mean_tol) {
  const TimeSeries ts = read_time_series(series_csv);
  CriterionResult r;
  r.name = "conservation";
  r.evidence = series_csv;
  r.threshold = 1;
  if (ts.records.empty()) {
    r.detail = "empty series";
    r.invalid = true;
    return r;
  }
  const SimRecord& a = ts.records.front();
  // The moment is a linear functional that vanishes on odd-symmetry states,
  // so its relative scale floors at the Cauchy-Schwarz ceiling ~ ||w||_2 for
  // the initial enstrophy. Energy is a positive form and stays purely
  // relative.
  const Real e_scale = std::max(std::abs(a.energy), Real(1e-300));
  const Real i_scale =
      std::max(std::abs(a.moment), std::sqrt(std::max(a.enstrophy, Real(0))));
  Real worst = 0;
  std::string which = "none";
  for (const SimRecord& rec : ts.records) {
    const Real de = std::abs(rec.energy - a.energy) / e_scale;
    const Real di = std::abs(rec.moment - a.moment) / i_scale;
    const Real dm = std::abs(rec.mean - a.mean);
    if (de / drift_tol > worst) worst = de / drift_tol, which = "energy";
    if (di / drift_tol > worst) worst = di / drift_tol, which = "moment";
    if (dm / mean_tol > worst) worst = dm / mean_tol, which = "mean";
  }
  r.measured = worst;
  r.pass = worst <= 1;
  r.invalid = !r.pass;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "largest drift / gate ratio %.3g (%s) over %zu records", worst,
                which.c_str(), ts.records.size());
  r.detail = buf;
  return r;
}

CriterionResult assess_sup_distance(const std::string& series_csv, Real bound) {
  const TimeSeries ts = read_time_series(series_csv);
  CriterionResult r;
  r.name = "sup-distance";
  r.evidence = series_csv;
  r.threshold = bound;
  Real sup = 0;
  for (const SimRecord& rec : ts.records)
    if (!std::isnan(rec.dist_ref)) sup = std::max(sup, rec.dist_ref);
  r.measured = sup;
  r.pass = sup <= bound;
  char buf[120];
  std::snprintf(buf, sizeof buf, "sup distance %.6g against bound %.6g", sup,
                bound);
  r.detail = buf;
  return r;
}

CriterionResult assess_escape_and_confinement(const std::string& series_csv,
                                              Real escape, Real factor) {
  const TimeSeries ts = read_time_series(series_csv);
  CriterionResult r;
  r.name = "escape-and-confinement";
  r.evidence = series_csv;
  if (ts.records.empty() || std::isnan(ts.records.front().orbit_dist)) {
    r.detail = "series carries no orbit distances";
    return r;
  }
  const Real confine = factor * ts.records.front().dist_ref;
  Real max_fixed = 0, max_orbit = 0;
  for (const SimRecord& rec : ts.records) {
    max_fixed = std::max(max_fixed, rec.dist_ref);
    max_orbit = std::max(max_orbit, rec.orbit_dist);
  }
  const bool escaped = max_fixed > escape;
  const bool confined = max_orbit <= confine;
  r.measured = max_fixed;
  r.threshold = escape;
  r.pass = escaped && confined;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "fixed-point distance peaks at %.4g (needs > %.4g); orbit "
                "distance peaks at %.4g (allowed %.4g)",
                max_fixed, escape, max_orbit, confine);
  r.detail = buf;
  return r;
}

CriterionResult assess_sup_column(const std::string& csv,
                                  const std::string& column, Real bound) {
  const Table t = read_table(csv);
  const Index c = t.col(column);
  CriterionResult r;
  r.name = "sup-" + column;
  r.evidence = csv;
  r.threshold = bound;
  Real sup = 0;
  for (const auto& row : t.rows) sup = std::max(sup, row[c]);
  r.measured = sup;
  r.pass = sup <= bound;
  char buf[120];
  std::snprintf(buf, sizeof buf, "sup %s = %.6g against bound %.6g",
                column.c_str(), sup, bound);
  r.detail = buf;
  return r;
}

namespace {

// Ladder response: each amplitude's sup distance at most half the previous.
CriterionResult assess_monotone_response(const std::vector<std::string>& files) {
  CriterionResult r;
  r.name = "response-monotonicity";
  r.evidence = files.empty() ? "" : files.back();
  r.threshold = Real(0.5);
  r.pass = true;
  Real worst = 0;
  Real prev = -1;
  for (const auto& f : files) {
    const Real sup = assess_sup_distance(f, 0).measured;
    if (prev >= 0) {
      const Real ratio = prev > 0 ? sup / prev : 0;
      worst = std::max(worst, ratio);
      if (!(sup <= prev / 2)) r.pass = false;
    }
    prev = sup;
  }
  r.measured = worst;
  char buf[140];
  std::snprintf(buf, sizeof buf,
                "largest consecutive response ratio %.4g over %zu amplitudes "
                "(each must be <= 0.5)",
                worst, files.size());
  r.detail = buf;
  return r;
}

// One stability leg: perturb `steady` at every ladder amplitude, integrate,
// write the series, and derive the verdicts from the files.
void stability_leg(const ExperimentSpec& spec, const Grid& g,
                   const ScalarField& steady, const CirculationVector& gamma0,
                   bool perturb_gamma, const std::string& tag, SplitMix64& rng,
                   ExperimentReport& rep) {
  EllipticContext ctx(g);
  const Real norm_s = lp_norm(g, steady, 2);
  std::vector<std::string> leg_files;
  for (size_t i = 0; i < spec.deltas.size(); ++i) {
    const Real delta = spec.deltas[i] * norm_s;
    const ScalarField noise = random_perturbation(ctx, rng);
    ScalarField w0(g);
    w0.values = steady.values + delta * noise.values;
    CirculationVector gamma = gamma0;
    if (perturb_gamma)
      for (Index w = 0; w < gamma.size(); ++w)
        gamma[w] += delta * rng.symmetric();

    SimConfig cfg;
    cfg.gamma = gamma;
    cfg.t_end = spec.horizon;
    cfg.snapshot_stride = pick_stride(ctx, cfg, w0);
    const RunResult rr = run(ctx, cfg, w0, &steady, spec.p);

    char name[80];
    std::snprintf(name, sizeof name, "stability%s_delta%zu.csv", tag.c_str(), i);
    const std::string file = join_path(spec.out_dir, name);
    write_time_series(file, rr.series);
    append_output(rep, file);
    leg_files.push_back(file);

    CriterionResult cons =
        assess_conservation(file, spec.drift_tol, spec.mean_tol);
    cons.name = std::string("conservation") + tag + "-delta" + std::to_string(i);
    CriterionResult sup =
        assess_sup_distance(file, spec.response_factor * delta);
    sup.name = std::string("sup-distance") + tag + "-delta" + std::to_string(i);
    if (cons.invalid) sup.invalid = true;
    rep.criteria.push_back(sup);
    rep.criteria.push_back(cons);
  }
  if (leg_files.size() > 1) {
    CriterionResult mono = assess_monotone_response(leg_files);
    mono.name = std::string("response-monotonicity") + tag;
    rep.criteria.push_back(mono);
  }
}

}  // namespace

ExperimentReport exp_stability(const ExperimentSpec& spec) {
  validate(spec);
  fs::create_directories(spec.out_dir);
  ExperimentReport rep;
  rep.name = "stability";
  SplitMix64 rng(spec.seed);

  Grid g(spec.a, spec.nr, spec.ntheta);
  stability_leg(spec, g, subcritical_steady(g),
                CirculationVector(g.n_boundaries() - 1), false, "", rng, rep);

  if (spec.with_annulus_variant && g.is_disk()) {
    Grid ga(Real(0.5), spec.nr, spec.ntheta);
    CirculationVector gamma0(1);
    gamma0[0] = Real(0.3);
    stability_leg(spec, ga, annulus_steady(ga), gamma0, true, "_annulus", rng,
                  rep);
  }
  return rep;
}

ExperimentReport exp_rotating_wave(const ExperimentSpec& spec) {
  validate(spec);
  fs::create_directories(spec.out_dir);
  ExperimentReport rep;
  rep.name = "rotating-wave";

  Grid g(0, spec.nr, spec.ntheta);
  EllipticContext ctx(g);
  const ScalarField steady = critical_steady(g);
  const Real norm_s = lp_norm(g, steady, spec.p);
  const CirculationVector gamma(0);

  for (int n : spec.wave_ns) {
    const ScalarField w0 = rotating_wave(g, n, 0);
    SimConfig cfg;
    cfg.gamma = gamma;
    cfg.t_end = spec.wave_horizon > 0 ? spec.wave_horizon : 2 * pi * n;
    cfg.snapshot_stride = pick_stride(ctx, cfg, w0);
    const RunResult rr = run(ctx, cfg, w0, &steady, spec.p);

    char name[64];
    std::snprintf(name, sizeof name, "rotating_wave_n%d.csv", n);
    const std::string file = join_path(spec.out_dir, name);
    write_time_series(file, rr.series);
    append_output(rep, file);

    CriterionResult cons =
        assess_conservation(file, spec.drift_tol, spec.mean_tol);
    cons.name = "conservation-n" + std::to_string(n);
    CriterionResult ec = assess_escape_and_confinement(
        file, Real(0.5) * norm_s, spec.response_factor);
    ec.name = "escape-and-confinement-n" + std::to_string(n);
    if (cons.invalid) ec.invalid = true;
    rep.criteria.push_back(ec);
    rep.criteria.push_back(cons);
  }

  if (spec.with_period_check) {
    // One full revolution of the n = 4 wave against the exact solution,
    // tracked at every snapshot.
    const int n = 4;
    Grid gp(0, spec.period_nr, spec.period_ntheta);
    EllipticContext ctxp(gp);
    const ScalarField w0 = rotating_wave(gp, n, 0);
    const Real wave_norm = lp_norm(gp, w0, 2);
    Table errs;
    errs.columns = {"t", "rel_err"};
    SimConfig cfg;
    cfg.gamma = gamma;
    cfg.t_end = 2 * pi * n;
    cfg.snapshot_stride = pick_stride(ctxp, cfg, w0);
    const RunResult rr = run(
        ctxp, cfg, w0, &w0, 2,
        [&](const SimState& s, const SimRecord& rec) {
          const ScalarField exact = rotating_wave(gp, n, rec.t);
          errs.rows.push_back({rec.t, lp_dist(gp, s.omega, exact, 2) / wave_norm});
        });

    const std::string sfile = join_path(spec.out_dir, "rotating_wave_period.csv");
    write_time_series(sfile, rr.series);
    append_output(rep, sfile);
    const std::string efile =
        join_path(spec.out_dir, "rotating_wave_period_err.csv");
    write_table(efile, errs);
    append_output(rep, efile);

    CriterionResult cons =
        assess_conservation(sfile, spec.drift_tol, spec.mean_tol);
    cons.name = "conservation-period";
    CriterionResult per = assess_sup_column(efile, "rel_err", Real(1e-2));
    per.name = "period-tracking";
    if (cons.invalid) per.invalid = true;
    rep.criteria.push_back(per);
    rep.criteria.push_back(cons);
  }
  return rep;
}

ProxyResult structural_proxy(const Grid& g, const ScalarField& omega,
                             const ScalarField& steady,
                             const std::array<ScalarField, 3>& basis, Real p) {
  ScalarField dev(g);
  dev.values = omega.values - steady.values;
  ScalarField v = steady;
  for (const ScalarField& e : basis) v.values += inner(g, dev, e) * e.values;
  const ScalarField proj = follower(g, v, steady, p);
  return {lp_dist(g, omega, proj, p), lp_dist(g, v, proj, p)};
}

ExperimentReport exp_structural(const ExperimentSpec& spec) {
  validate(spec);
  fs::create_directories(spec.out_dir);
  ExperimentReport rep;
  rep.name = "structural";
  SplitMix64 rng(spec.seed);

  Grid g(0, spec.nr, spec.ntheta);
  EllipticContext ctx(g);
  const ScalarField steady = critical_steady(g);
  const std::array<ScalarField, 3> basis = e1_basis(g);
  const Real norm_s = lp_norm(g, steady, 2);
  const CirculationVector gamma(0);

  std::vector<std::string> proxy_files;
  for (size_t i = 0; i < spec.deltas.size(); ++i) {
    const Real delta = spec.deltas[i] * norm_s;
    const ScalarField noise = random_perturbation(ctx, rng);
    ScalarField w0(g);
    w0.values = steady.values + delta * noise.values;

    Table proxy;
    proxy.columns = {"t", "d", "defect"};
    SimConfig cfg;
    cfg.gamma = gamma;
    cfg.t_end = spec.horizon;
    cfg.snapshot_stride = pick_stride(ctx, cfg, w0);
    const RunResult rr = run(
        ctx, cfg, w0, &steady, spec.p,
        [&](const SimState& s, const SimRecord& rec) {
          const ProxyResult pr =
              structural_proxy(g, s.omega, steady, basis, spec.p);
          proxy.rows.push_back({rec.t, pr.d, pr.defect});
        });

    char name[64];
    std::snprintf(name, sizeof name, "structural_delta%zu.csv", i);
    const std::string sfile = join_path(spec.out_dir, name);
    write_time_series(sfile, rr.series);
    append_output(rep, sfile);
    std::snprintf(name, sizeof name, "structural_proxy_delta%zu.csv", i);
    const std::string pfile = join_path(spec.out_dir, name);
    write_table(pfile, proxy);
    append_output(rep, pfile);
    proxy_files.push_back(pfile);

    CriterionResult cons =
        assess_conservation(sfile, spec.drift_tol, spec.mean_tol);
    cons.name = "conservation-delta" + std::to_string(i);
    CriterionResult sup =
        assess_sup_column(pfile, "d", spec.response_factor * delta);
    sup.name = "target-distance-delta" + std::to_string(i);
    if (cons.invalid) sup.invalid = true;
    rep.criteria.push_back(sup);
    rep.criteria.push_back(cons);

    CriterionResult def = assess_sup_column(pfile, "defect", norm_s);
    def.name = "proxy-defect-delta" + std::to_string(i);
    def.pass = true;  // reported, not gated: the projection has no exact target
    def.detail += " (informational)";
    rep.criteria.push_back(def);
  }
  return rep;
}

ExperimentReport exp_rigidity(const ExperimentSpec& spec) {
  validate(spec);
  fs::create_directories(spec.out_dir);
  ExperimentReport rep;
  rep.name = "rigidity";
  SplitMix64 rng(spec.seed);

  Grid g(0, spec.nr, spec.ntheta);
  EllipticContext ctx(g);
  const CirculationVector gamma(0);

  // Ascent leg: in-class seeds are exact rearrangements of the radial state,
  // built by transporting it onto random orderings.
  {
    const ScalarField steady = subcritical_steady(g);
    const Real norm_s = lp_norm(g, steady, 2);
    Table t;
    t.columns = {"seed", "iterations", "energy_start", "energy_end", "rel_dist",
                 "quantile_dist", "monotone"};
    for (int s = 0; s < spec.n_seeds; ++s) {
      const ScalarField order = random_perturbation(ctx, rng);
      const ScalarField seed_field = transport_rearrange(g, steady, order);
      const AscentReport ar = burton_ascent(ctx, seed_field, gamma);
      bool monotone = true;
      for (size_t i = 1; i < ar.energies.size(); ++i)
        if (ar.energies[i] < ar.energies[i - 1] -
                                 Real(1e-10) * std::max(Real(1), std::abs(ar.energies[i - 1])))
          monotone = false;
      t.rows.push_back({Real(s), Real(ar.iterations), ar.energies.front(),
                        ar.energies.back(),
                        lp_dist(g, ar.final_field, steady, 2) / norm_s,
                        quantile_distance(cell_list(g, ar.final_field),
                                          cell_list(g, steady)),
                        monotone ? Real(1) : Real(0)});
    }
    const std::string file = join_path(spec.out_dir, "rigidity_ascent.csv");
    write_table(file, t);
    append_output(rep, file);

    CriterionResult conv = assess_sup_column(file, "rel_dist", Real(1e-2));
    conv.name = "ascent-convergence";
    rep.criteria.push_back(conv);
    CriterionResult mono = assess_sup_column(file, "monotone", 1);
    mono.name = "ascent-energy-monotone";
    // Every row must report 1; the sup being 1 is necessary, the min is what
    // decides, so recheck it here from the same table.
    {
      const Table back = read_table(file);
      const Index c = back.col("monotone");
      mono.pass = true;
      for (const auto& row : back.rows)
        if (row[c] != 1) mono.pass = false;
      mono.measured = mono.pass ? 1 : 0;
      mono.threshold = 1;
      mono.detail = "every ascent energy sequence nondecreasing";
    }
    rep.criteria.push_back(mono);
  }

  // Orbit-identification leg: the radial-moment and norm pair separates
  // rotations of a two-mode field from coefficient perturbations.
  {
    const ScalarField b0 =
        sample_with(g, [](Real r, Real) { return bessel_j(0, j1_zero1 * r); });
    const ScalarField b1 = critical_steady(g);
    const Real alpha = Real(0.7), beta = Real(0.5);
    ScalarField ref(g);
    ref.values = alpha * b0.values + beta * b1.values;
    const Real I_ref = moment_of_inertia(g, ref);
    const Real n_ref = lp_norm(g, ref, 2);
    const Real nb0 = lp_norm(g, b0, 2), nb1 = lp_norm(g, b1, 2);

    auto two_mode = [&](Real al, Real be) {
      ScalarField f(g);
      f.values = al * b0.values + be * b1.values;
      return f;
    };
    // Same norm, different radial coefficient: the decoy only the moment
    // catches.
    const Real al_decoy = alpha - Real(0.05);
    const Real be_decoy = std::sqrt(
        (n_ref * n_ref - al_decoy * al_decoy * nb0 * nb0) / (nb1 * nb1));

    struct Candidate {
      std::string name;
      ScalarField field;
      bool member;
    };
    std::vector<Candidate> cands;
    cands.push_back({"rotated_small", rotate_field(g, ref, Real(0.4)), true});
    cands.push_back({"rotated_half_turn", rotate_field(g, ref, pi), true});
    cands.push_back({"alpha_shift", two_mode(alpha + Real(0.1), beta), false});
    cands.push_back({"beta_scale", two_mode(alpha, Real(1.1) * beta), false});
    cands.push_back({"beta_flip", two_mode(alpha, -beta), true});
    cands.push_back({"norm_matched_decoy", two_mode(al_decoy, be_decoy), false});

    const Real tol = Real(1e-6);
    Table t;
    t.columns = {"moment", "norm",       "moment_gap", "norm_gap",
                 "predicted", "orbit_dist", "truth",      "correct"};
    char com[160];
    std::snprintf(com, sizeof com, "moment_integral=%.17g closed_form=%.17g",
                  radial_moment_integral(),
                  2 * bessel_j(0, j1_zero1) / (j1_zero1 * j1_zero1));
    t.comments.push_back(com);
    std::string names;
    for (const Candidate& c : cands) {
      const Real I_c = moment_of_inertia(g, c.field);
      const Real n_c = lp_norm(g, c.field, 2);
      const Real gap_i = std::abs(I_c - I_ref) / std::max(Real(1), std::abs(I_ref));
      const Real gap_n = std::abs(n_c - n_ref) / n_ref;
      const bool predicted = gap_i <= tol && gap_n <= tol;
      const Real od = orbit_distance(g, c.field, ref, 2).distance;
      const bool correct = predicted == c.member;
      t.rows.push_back({I_c, n_c, gap_i, gap_n, predicted ? Real(1) : Real(0),
                        od, c.member ? Real(1) : Real(0),
                        correct ? Real(1) : Real(0)});
      names += (names.empty() ? "" : " ") + c.name;
    }
    t.comments.push_back("candidates: " + names);
    const std::string file = join_path(spec.out_dir, "rigidity_classifier.csv");
    write_table(file, t);
    append_output(rep, file);

    CriterionResult cls;
    cls.name = "classifier-separation";
    cls.evidence = file;
    cls.threshold = 1;
    {
      const Table back = read_table(file);
      const Index c = back.col("correct");
      int ok = 0;
      for (const auto& row : back.rows) ok += row[c] == 1;
      cls.measured = Real(ok) / Real(back.rows.size());
      cls.pass = ok == static_cast<int>(back.rows.size());
      cls.detail = std::to_string(ok) + " of " +
                   std::to_string(back.rows.size()) +
                   " candidates classified correctly";
    }
    rep.criteria.push_back(cls);

    CriterionResult mom;
    mom.name = "moment-integral";
    mom.evidence = file;
    {
      const Table back = read_table(file);
      const Real measured = comment_value(back, "moment_integral");
      const Real closed = comment_value(back, "closed_form");
      mom.measured = measured;
      mom.threshold = Real(1e-10);
      mom.pass = measured < 0 && std::abs(measured - closed) <= Real(1e-10);
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "quadrature %.12g vs closed form %.12g (gap %.3g)", measured,
                    closed, std::abs(measured - closed));
      mom.detail = buf;
    }
    rep.criteria.push_back(mom);
  }
  return rep;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.name == "stability") return exp_stability(spec);
  if (spec.name == "rotating-wave") return exp_rotating_wave(spec);
  if (spec.name == "structural") return exp_structural(spec);
  return exp_rigidity(spec);
}

ExperimentSpec spec_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("spec_from_json: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("spec_from_json: " + std::string(e.what()));
  }
  ExperimentSpec s;
  s.name = j.value("name", s.name);
  s.a = j.value("a", s.a);
  s.nr = j.value("nr", s.nr);
  s.ntheta = j.value("ntheta", s.ntheta);
  if (j.contains("deltas")) s.deltas = j["deltas"].get<std::vector<Real>>();
  s.p = j.value("p", s.p);
  s.horizon = j.value("horizon", s.horizon);
  s.response_factor = j.value("response_factor", s.response_factor);
  s.drift_tol = j.value("drift_tol", s.drift_tol);
  s.mean_tol = j.value("mean_tol", s.mean_tol);
  s.seed = j.value("seed", s.seed);
  s.snapshot_stride = j.value("snapshot_stride", s.snapshot_stride);
  if (j.contains("wave_ns")) s.wave_ns = j["wave_ns"].get<std::vector<int>>();
  s.wave_horizon = j.value("wave_horizon", s.wave_horizon);
  s.with_period_check = j.value("with_period_check", s.with_period_check);
  s.period_nr = j.value("period_nr", s.period_nr);
  s.period_ntheta = j.value("period_ntheta", s.period_ntheta);
  s.with_annulus_variant =
      j.value("with_annulus_variant", s.with_annulus_variant);
  s.n_seeds = j.value("n_seeds", s.n_seeds);
  s.out_dir = j.value("out_dir", s.out_dir);
  validate(s);
  return s;
}

void write_report_json(const std::string& path, const ExperimentReport& report) {
  json j;
  j["name"] = report.name;
  j["exit_code"] = report.exit_code();
  j["criteria"] = json::array();
  for (const auto& c : report.criteria) {
    j["criteria"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"invalid", c.invalid},
                             {"measured", c.measured},
                             {"threshold", c.threshold},
                             {"detail", c.detail},
                             {"evidence", c.evidence}});
  }
  j["outputs"] = report.outputs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write_report_json: write failed " + path);
}

}  // namespace vorstab
