#pragma once

#include <vector>

#include "vorstab/fourier.hpp"
#include "vorstab/grid.hpp"

namespace vorstab {

enum class WallBc { dirichlet, zero_flux };

// Tridiagonal radial operator for a single angular mode, conservative form:
//   (A u)_j = -[rf_{j+1}(u_{j+1}-u_j) - rf_j(u_j-u_{j-1})]/(r_j dr^2) + (m^2/r_j^2) u_j
// Wall closures use the half-cell ghost (2c - u); with c folded into the
// right-hand side the matrix is symmetric under the cell-measure weight.
// At the disk center rf_0 = 0, so the closure there is flagless.
struct RadialOperator {
  Vector sub, diag, sup;  // sizes nr-1, nr, nr-1
};

RadialOperator radial_operator(const Grid& g, Real m_sq, WallBc inner, WallBc outer);

// Thomas factorization; coefficients real, right-hand sides real or complex.
class TridiagFactor {
 public:
  TridiagFactor() = default;
  explicit TridiagFactor(const RadialOperator& op);
  void solve_in_place(Vector& d) const;
  void solve_in_place(Eigen::VectorXcd& d) const;
  Index size() const { return piv_.size(); }

 private:
  Vector piv_, mult_, sup_;
};

// Per-wall scalars are ordered [outer, inner]; the inner entry exists only on
// the annulus. Circulation vectors hold one entry per inner wall, so they are
// empty on the disk.
class EllipticContext {
 public:
  explicit EllipticContext(const Grid& g);

  const Grid& grid() const { return grid_; }

  // Solve -lap u = v with zero trace on every wall.
  void dirichlet_solve(const ArrayRT& v, ArrayRT& u) const;

  // Mode-0 radial solve against the Dirichlet operator (rhs in cell values).
  Vector solve_mode0(const Vector& rhs) const;

  // Harmonic measure of the inner wall (radial profile), and the Dirichlet
  // energy p11 = B(zeta, zeta) with its unit trace, q11 = 1/p11.
  const Vector& zeta() const { return zeta_; }
  Real p11() const { return p11_; }
  Real q11() const { return q11_; }

  // Spectral-in-theta application of the discrete operator: out = -lap u,
  // wall traces supplied explicitly.
  void apply_operator(const ArrayRT& u, const Vector& traces, ArrayRT& out) const;

  // Theta-spectral part of the Dirichlet form, sum_j sum_m (m/r_j)^2 |u_hat|^2
  // with the measure weights. The radial part lives in dirichlet_energy.
  Real theta_energy(const ArrayRT& u) const;

  SpectralTheta& fft() const { return fft_; }

 private:
  Grid grid_;
  std::vector<RadialOperator> ops_;
  std::vector<TridiagFactor> mode_;
  Vector zeta_;
  Real p11_ = 0, q11_ = 0;
  mutable SpectralTheta fft_;
};

// Green operator G: zero-trace solve of -lap u = v.
ScalarField dirichlet_solve(const EllipticContext& ctx, const ScalarField& v);

// P v = G v + sum_ij q_ij <v, zeta_i> zeta_j (reduces to G on the disk).
ScalarField apply_P(const EllipticContext& ctx, const ScalarField& v);

// h_gamma = -sum_ij q_ij gamma_i zeta_j; the zero field on the disk.
ScalarField h_gamma(const EllipticContext& ctx, const CirculationVector& gamma);

// T v = P v - mean(P v) on mean-zero input.
ScalarField apply_T(const EllipticContext& ctx, const ScalarField& v);

struct VcpSolution {
  ScalarField psi;
  Vector traces;  // [outer, inner...]
};

// Stream function of (omega, gamma): mean-zero, constant wall traces, and
// wall circulations -flux equal to gamma on inner walls and to
// integral(omega) - sum(gamma) on the outer wall.
VcpSolution solve_vcp(const EllipticContext& ctx, const ScalarField& omega,
                      const CirculationVector& gamma);

// One-sided second-order flux integral of the outward normal derivative over
// wall 0 (outer) or 1 (inner). Independent of the solver's own closures.
Real boundary_flux(const Grid& g, const ScalarField& u, int wall);

// Scheme-native flux built from the same half-cell wall gradients as the
// solver; exact summation-by-parts partner of apply_operator.
Real natural_flux(const Grid& g, const ScalarField& u, const Vector& traces, int wall);

// Dirichlet form of the discrete operator: radial face differences plus the
// half-cell wall terms at the given traces, plus the theta-spectral energy.
Real dirichlet_energy(const EllipticContext& ctx, const ScalarField& u, const Vector& traces);

struct RayleighReport {
  Real quotient = 0;       // B(u,u; traces) / <u,u>
  Vector traces;           // wall traces used
  Real trace_defect = 0;   // max deviation of the per-column trace estimate
  Real mean = 0;           // weighted mean of u
};

// Quotient with traces estimated by quadratic extrapolation to each wall.
RayleighReport rayleigh_quotient(const EllipticContext& ctx, const ScalarField& u);
// Quotient with known traces (exact wall data beats the extrapolated guess).
RayleighReport rayleigh_quotient(const EllipticContext& ctx, const ScalarField& u,
                                 const Vector& traces);

// E(omega, gamma) = 1/2 <omega, P omega> + <h_gamma, omega> + 1/2 q gamma^2.
Real energy(const EllipticContext& ctx, const ScalarField& omega,
            const CirculationVector& gamma);

}  // namespace vorstab
