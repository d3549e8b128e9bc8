#include "vorstab/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vorstab {

namespace {

// Cell indices sorted by (value descending, flat index ascending). Flat index
// is j * ntheta + k, matching the storage walk below.
std::vector<Index> sorted_cells(const Grid& g, const ScalarField& f) {
  const Index n = g.nr() * g.ntheta();
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  const auto value = [&](Index i) { return f.values(i / g.ntheta(), i % g.ntheta()); };
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const Real va = value(a), vb = value(b);
    if (va != vb) return va > vb;
    return a < b;
  });
  return idx;
}

}  // namespace

CellList cell_list(const Grid& g, const ScalarField& f) {
  require_match(g, f, "cell_list");
  const auto idx = sorted_cells(g, f);
  CellList out;
  out.values.resize(static_cast<Index>(idx.size()));
  out.weights.resize(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) {
    const Index j = idx[i] / g.ntheta();
    out.values[static_cast<Index>(i)] = f.values(j, idx[i] % g.ntheta());
    out.weights[static_cast<Index>(i)] = g.cell_measure(j);
  }
  return out;
}

Real distribution(const Grid& g, const ScalarField& f, Real s) {
  require_match(g, f, "distribution");
  Real total = 0;
  for (Index j = 0; j < g.nr(); ++j) {
    const Real w = g.cell_measure(j);
    for (Index k = 0; k < g.ntheta(); ++k)
      if (f.values(j, k) > s) total += w;
  }
  return total;
}

Real quantile_distance(const CellList& a, const CellList& b) {
  if (a.values.size() == 0 || b.values.size() == 0)
    throw std::invalid_argument("quantile_distance: empty cell list");
  const Real ta = a.total_measure(), tb = b.total_measure();
  if (std::abs(ta - tb) > Real(1e-10) * std::max(Real(1), std::max(ta, tb)))
    throw std::invalid_argument("quantile_distance: total measures differ");
  Index ia = 0, ib = 0;
  Real ra = a.weights[0], rb = b.weights[0];
  Real dist = 0;
  while (ia < a.values.size() && ib < b.values.size()) {
    const Real take = std::min(ra, rb);
    dist += std::abs(a.values[ia] - b.values[ib]) * take;
    ra -= take;
    rb -= take;
    if (ra <= 0 && ++ia < a.values.size()) ra = a.weights[ia];
    if (rb <= 0 && ++ib < b.values.size()) rb = b.weights[ib];
  }
  // Leftover mass is bounded by the total-measure gate above.
  while (ia < a.values.size()) {
    dist += std::abs(a.values[ia]) * ra;
    if (++ia < a.values.size()) ra = a.weights[ia];
  }
  while (ib < b.values.size()) {
    dist += std::abs(b.values[ib]) * rb;
    if (++ib < b.values.size()) rb = b.weights[ib];
  }
  return dist;
}

bool equimeasurable(const ScalarField& a, const ScalarField& b, Real tol) {
  const Grid ga(a.a, a.nr(), a.ntheta());
  const Grid gb(b.a, b.nr(), b.ntheta());
  if (std::abs(ga.total_measure() - gb.total_measure()) >
      Real(1e-10) * std::max(Real(1), ga.total_measure()))
    throw std::invalid_argument("equimeasurable: domains have different total measure");
  return quantile_distance(cell_list(ga, a), cell_list(gb, b)) <= tol;
}

TransportResult transport_plan(const Grid& g, const ScalarField& source,
                               const ScalarField& order) {
  require_match(g, source, "transport_rearrange");
  require_match(g, order, "transport_rearrange");
  const CellList src = cell_list(g, source);
  const auto dst = sorted_cells(g, order);
  const Index n = src.values.size();

  TransportResult out;
  out.field = ScalarField(g);
  std::vector<Real> atom_values, atom_weights;
  atom_values.reserve(static_cast<size_t>(n) + dst.size());
  atom_weights.reserve(static_cast<size_t>(n) + dst.size());

  // Two-pointer walk over matched cumulative measure. take = min(need, avail)
  // followed by exact subtraction lands every shared boundary on exactly zero,
  // so each destination receives exactly its own measure; only the final
  // global prefix-sum mismatch can remain unassigned.
  Index ia = 0;
  Real avail = src.weights[0];
  for (Index d : dst) {
    const Index j = d / g.ntheta();
    const Real w = g.cell_measure(j);
    Real need = w, acc = 0, last = 0;
    int pieces = 0;
    while (need > 0 && ia < n) {
      const Real take = std::min(need, avail);
      if (take > 0) {
        last = src.values[ia];
        acc += last * take;
        atom_values.push_back(last);
        atom_weights.push_back(take);
        ++pieces;
        need -= take;
        avail -= take;
      }
      if (avail <= 0 && ++ia < n) avail = src.weights[ia];
    }
    out.plan_defect = std::max(out.plan_defect, need);
    // A destination covered by a single source atom keeps that value exactly;
    // this is what makes co-monotone configurations bit-exact fixed points.
    out.field.values(j, d % g.ntheta()) = (pieces == 1) ? last : acc / w;
  }
  Real leftover = (ia < n) ? avail : Real(0);
  for (Index i = ia + 1; i < n; ++i) leftover += src.weights[i];
  out.plan_defect = std::max(out.plan_defect, leftover);
  if (out.plan_defect > Real(1e-10) * g.total_measure())
    throw std::runtime_error("transport_rearrange: measure bookkeeping failed");

  out.atoms.values = Eigen::Map<Vector>(atom_values.data(), static_cast<Index>(atom_values.size()));
  out.atoms.weights =
      Eigen::Map<Vector>(atom_weights.data(), static_cast<Index>(atom_weights.size()));
  return out;
}

ScalarField transport_rearrange(const Grid& g, const ScalarField& source,
                                const ScalarField& order) {
  return transport_plan(g, source, order).field;
}

ScalarField follower(const Grid& g, const ScalarField& w, const ScalarField& reference, Real p) {
  if (!(p >= 1)) throw std::invalid_argument("follower: p must be at least 1");
  return transport_rearrange(g, reference, w);
}

AscentReport burton_ascent(const EllipticContext& ctx, const ScalarField& seed,
                           const CirculationVector& gamma, int max_iters, Real fp_tol) {
  const Grid& g = ctx.grid();
  require_match(g, seed, "burton_ascent");
  if (max_iters < 1) throw std::invalid_argument("burton_ascent: max_iters must be positive");
  if (!seed.values.isFinite().all())
    throw std::invalid_argument("burton_ascent: seed has nonfinite values");
  if (fp_tol < 0) fp_tol = Real(1e-8) * lp_norm(g, seed, 2);

  const ScalarField lift = h_gamma(ctx, gamma);  // validates gamma size
  AscentReport rep;
  rep.final_field = seed;
  rep.energies.push_back(energy(ctx, seed, gamma));
  ScalarField diff(g);
  for (int it = 0; it < max_iters; ++it) {
    ScalarField order = apply_P(ctx, rep.final_field);
    order.values += lift.values;
    ScalarField next = transport_rearrange(g, seed, order);
    diff.values = next.values - rep.final_field.values;
    rep.residual = lp_norm(g, diff, 2);

    const Real e = energy(ctx, next, gamma);
    const Real prev = rep.energies.back();
    if (e < prev - Real(1e-10) * std::max(Real(1), std::abs(prev)))
      throw std::runtime_error("burton_ascent: energy decreased along the ascent");
    rep.energies.push_back(e);
    rep.final_field = std::move(next);
    ++rep.iterations;
    if (rep.residual <= fp_tol) {
      rep.termination = "fixed_point";
      return rep;
    }
  }
  rep.termination = "max_iters";
  return rep;
}

}  // namespace vorstab
