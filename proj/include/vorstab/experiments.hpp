#pragma once

// Scripted stability scenarios: each experiment integrates a steady state
// under controlled perturbations (or drives the ascent maximizer), writes its
// evidence as CSV time series, and derives every verdict by re-reading those
// files, so a report can be audited or recomputed from the artifacts alone.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vorstab/elliptic.hpp"
#include "vorstab/euler.hpp"
#include "vorstab/prng.hpp"

namespace vorstab {

struct ExperimentSpec {
  std::string name = "stability";  // stability | rotating-wave | structural | rigidity
  Real a = 0;
  Index nr = 48;
  Index ntheta = 96;
  std::vector<Real> deltas = {Real(1e-1), Real(1e-2), Real(1e-3)};  // relative
  Real p = 2;
  Real horizon = 10;
  Real response_factor = 5;  // harness policy: allowed response multiple
  Real drift_tol = Real(1e-3);
  Real mean_tol = Real(1e-8);
  std::uint64_t seed = 0x5EEDBA5Eu;
  Index snapshot_stride = 0;  // 0: pick a stride giving ~200 records

  // rotating-wave extras
  std::vector<int> wave_ns = {4, 8, 16};
  Real wave_horizon = 0;  // absolute; 0 means one full revolution, 2 pi n
  bool with_period_check = true;
  Index period_nr = 96;
  Index period_ntheta = 192;

  // stability extras
  bool with_annulus_variant = true;

  // rigidity extras
  int n_seeds = 20;

  std::string out_dir = ".";
};

void validate(const ExperimentSpec& spec);

struct CriterionResult {
  std::string name;
  bool pass = false;
  bool invalid = false;  // conservation gate tripped; overrides pass/fail
  Real measured = 0;
  Real threshold = 0;
  std::string detail;
  std::string evidence;  // the CSV file the verdict was computed from
};

struct ExperimentReport {
  std::string name;
  std::vector<CriterionResult> criteria;
  std::vector<std::string> outputs;
  bool all_pass() const;
  bool any_invalid() const;
  // 0 all pass, 2 any fail, 3 any invalid (invalid dominates).
  int exit_code() const;
};

// Random smooth mean-free perturbation of unit weighted L2 norm, assembled
// from the first n_ang x n_rad sector Dirichlet eigenmodes with coefficients
// drawn via rng.symmetric(). Draw order: sectors ascending, radial index
// ascending, cosine coefficient before sine (sine only for m >= 1).
ScalarField random_perturbation(const EllipticContext& ctx, SplitMix64& rng,
                                int n_ang = 8, int n_rad = 8);

// Distance to the structural target set, computed through a proxy: lift the
// deviation from `steady` onto span(basis) (least squares), project that
// affine fit onto steady's rearrangement class, and measure the state
// against the projected member. `defect` reports how far the affine fit sat
// from the class, the proxy's own error bar.
struct ProxyResult {
  Real d = 0;
  Real defect = 0;
};
ProxyResult structural_proxy(const Grid& g, const ScalarField& omega,
                             const ScalarField& steady,
                             const std::array<ScalarField, 3>& basis, Real p);

ExperimentReport exp_stability(const ExperimentSpec& spec);
ExperimentReport exp_rotating_wave(const ExperimentSpec& spec);
ExperimentReport exp_structural(const ExperimentSpec& spec);
ExperimentReport exp_rigidity(const ExperimentSpec& spec);

// Dispatch on spec.name.
ExperimentReport run_experiment(const ExperimentSpec& spec);

// Verdict kernels, pure functions of the written evidence. The experiment
// drivers call exactly these on their own files.
//
// Conservation audit of a standard time series: relative E and I drift
// against drift_tol, mean drift against mean_tol. Returns the largest
// offending ratio (drift / gate) in `measured`.
CriterionResult assess_conservation(const std::string& series_csv,
                                    Real drift_tol, Real mean_tol);
// sup over records of dist_ref against bound (absolute, in the series norm).
CriterionResult assess_sup_distance(const std::string& series_csv, Real bound);
// sup over rows of a named column in a small auxiliary CSV (header line of
// column names, numeric rows, leading `# ...` comments allowed).
CriterionResult assess_sup_column(const std::string& csv,
                                  const std::string& column, Real bound);
// Rotating-wave pair: fixed-point distance must exceed `escape` somewhere
// while orbit distance never exceeds `factor` times the initial offset
// (the first dist_ref in the file).
CriterionResult assess_escape_and_confinement(const std::string& series_csv,
                                              Real escape, Real factor);

// Spec and report exchange (JSON).
ExperimentSpec spec_from_json(const std::string& path);
void write_report_json(const std::string& path, const ExperimentReport& report);

}  // namespace vorstab
