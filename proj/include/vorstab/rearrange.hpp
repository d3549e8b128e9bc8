#pragma once

#include <string>
#include <vector>

#include "vorstab/elliptic.hpp"
#include "vorstab/grid.hpp"
#include "vorstab/types.hpp"

namespace vorstab {

// Flattened (value, measure) atoms of a field, sorted by descending value.
// Ties break by flat cell index, so every construction is deterministic.
struct CellList {
  Vector values;
  Vector weights;
  Real total_measure() const { return weights.sum(); }
};

CellList cell_list(const Grid& g, const ScalarField& f);

// Measure of the superlevel set {f > s}.
Real distribution(const Grid& g, const ScalarField& f, Real s);

// L1-of-measure distance between the descending step quantile functions.
// Throws when the lists carry different total measure.
Real quantile_distance(const CellList& a, const CellList& b);

// True when the two fields have the same value distribution up to tol,
// measured as quantile_distance of their cell lists. The fields may live on
// different grids; domains of unequal total measure are rejected.
bool equimeasurable(const ScalarField& a, const ScalarField& b, Real tol);

// Monotone measure-matched transport: `source`'s descending quantile written
// onto the cells sorted by descending `order` value. When cumulative
// boundaries disagree a source value splits across order-adjacent cells.
//
// field  per-cell averages of the plan, the grid-function realization
// atoms   the exact split plan, one entry per (source atom, destination cell)
//         overlap; equimeasurable with the source by construction
// plan_defect  unassigned measure at the walk's end (prefix-sum roundoff)
struct TransportResult {
  ScalarField field;
  CellList atoms;
  Real plan_defect = 0;
};

TransportResult transport_plan(const Grid& g, const ScalarField& source,
                               const ScalarField& order);

ScalarField transport_rearrange(const Grid& g, const ScalarField& source,
                                const ScalarField& order);

// Nearest element of `reference`'s rearrangement class to w in L^p: the
// co-monotone pairing, optimal simultaneously for every convex power p >= 1.
// p only gates the contract (p < 1 rejected); the arrangement is the same.
ScalarField follower(const Grid& g, const ScalarField& w,
                     const ScalarField& reference, Real p);

struct AscentReport {
  int iterations = 0;          // transports applied
  std::vector<Real> energies;  // seed energy first, then one entry per step
  ScalarField final_field;
  Real residual = 0;           // L2 distance of the last iterate to its own transport
  std::string termination;     // "fixed_point" or "max_iters"
};

// Energy ascent over the rearrangement class of `seed`: iterate
// v <- transport_rearrange(seed, order = P v + h_gamma). Each step is
// nondecreasing in energy(., gamma); a decrease beyond 1e-10 * scale aborts,
// since it can only come from an implementation fault. Negative fp_tol means
// the default 1e-8 * ||seed||_2.
AscentReport burton_ascent(const EllipticContext& ctx, const ScalarField& seed,
                           const CirculationVector& gamma, int max_iters = 500,
                           Real fp_tol = Real(-1));

}  // namespace vorstab
