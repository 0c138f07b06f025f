#pragma once

// Numerical verification of the evolution identities of Section 2.
//
// Two-sided independence: every left side is built only by differencing
// stored fields (centered in time, discrete Laplacian in space); every right
// side is built only from geometry primitives applied to v, R and F at one
// stored instant. Residuals are taken over interior nodes (poles and their
// neighbours skipped) and stored times at least two steps away from either
// end of the trajectory.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfpme/field.hpp"
#include "rfpme/manifold.hpp"
#include "rfpme/pme.hpp"

namespace rfpme::identities {

struct IdentityResidual {
  std::string id;
  double max_abs_residual = 0.0;
  /// max |LHS| over the same nodes: the magnitude the residual is measured
  /// against (truncation error scales with it).
  double scale = 0.0;
  std::size_t intervals = 0;  // grid used (finest level for a study)
  double step = 0.0;          // stored time spacing (0 for static checks)
  std::size_t node = 0;       // location of the worst residual
  double time = 0.0;
  /// Observed order over refinement levels; present only when at least two
  /// resolutions were run.
  std::optional<double> measured_order;
};

/// One named group of a right side, evaluated at one stored state.
struct Term {
  std::string name;
  ScalarField value;
};

/// L f = df/dt - (p-1) v Delta f at stored state j, with df/dt the centered
/// three-point difference of `history` (one entry per stored state).
ScalarField L_operator(std::span<const ScalarField> history, const pme::Trajectory& traj,
                       std::size_t j);
double L_operator(std::span<const ScalarField> history, const pme::Trajectory& traj,
                  std::size_t node, std::size_t j);

/// Samples fn(s, t) at every stored state of traj.
std::vector<ScalarField> sample_history(const pme::Trajectory& traj,
                                        const std::function<double(double, double)>& fn);

/// max |L(f/g) - [L(f)/g - (f/g^2) L(g) + 2(p-1) v grad(f/g).grad(ln g)]|.
/// Throws std::domain_error when g <= 0 somewhere.
IdentityResidual quotient_rule_residual(std::span<const ScalarField> f,
                                        std::span<const ScalarField> g,
                                        const pme::Trajectory& traj);

/// F = |grad v|^2/v - b v_t/v + c R/v at every stored state, with the stored
/// (differenced) v_t.
std::vector<ScalarField> F_history(const pme::Trajectory& traj, double b, double c);

/// The right side of Proposition 2.1 at stored state j, split into its ten
/// display groups; `F` is F at state j.
std::vector<Term> prop21_terms(const pme::Trajectory& traj, std::size_t j, const ScalarField& F,
                               double a, double b, double c);

/// The right side of Proposition 2.2 (a = 1, c = 1 - b) at stored state j,
/// split into its display groups.
std::vector<Term> prop22_terms(const pme::Trajectory& traj, std::size_t j, const ScalarField& F,
                               double b);

ScalarField sum(std::span<const Term> terms);

/// max |L(F) - RHS of Proposition 2.1|. `a` must match the trajectory.
IdentityResidual prop21_residual(const pme::Trajectory& traj, double a, double b, double c);

/// max |L(F) - RHS of Proposition 2.2| with c = 1 - b. Needs a = 1.
IdentityResidual prop22_residual(const pme::Trajectory& traj, double b);

/// max over stored states in the residual window of |RHS 2.1 - RHS 2.2| at
/// a = 1, c = 1 - b: the two independently coded right sides against each
/// other. Both take F in its expanded (pressure-equation) form, where the
/// rearrangement is exact algebra.
IdentityResidual prop21_vs_prop22(const pme::Trajectory& traj, double b);

/// max |Delta|grad f|^2 - 2 grad(Delta f).grad f - 2|grad^2 f|^2 - 2 Rc(grad f, grad f)|.
IdentityResidual bochner_residual(const ScalarField& f, const ManifoldState& m);

struct YzCheck {
  /// max |F - (y - b z)| with c = 1 - b: pure algebra, roundoff level.
  IdentityResidual algebraic;
  /// b = 1 only: max |(y - z) + (p-1) Delta v + (p-1) R|.
  std::optional<IdentityResidual> b1;
};
YzCheck yz_decomposition_check(const pme::Trajectory& traj, double b);

/// Runs `level(k)` for k = 0..levels-1 (each halving h) and returns the
/// finest result with measured_order set from the sequence of residuals.
IdentityResidual convergence_study(const std::function<IdentityResidual(std::size_t)>& level,
                                   std::size_t levels);

/// Level k of an (h, dt) -> (h/2, dt/4) refinement of `base`: the manifold
/// make(intervals0 * 2^k) run with outer step base.dt / 4^k, storing every
/// outer step so that the stored spacing follows dt.
pme::Trajectory refined_run(const pme::PmeParams& base,
                            const std::function<ManifoldState(std::size_t)>& make,
                            std::size_t intervals0, std::size_t k);

/// Closed forms on the homogeneous round sphere S^n with rho^2(0) = rho0_sq
/// and v(0) = v0 spatially constant, for u_t = Delta u^p + a R u:
///   R = n(n-1)/rho^2,  v = v0 (rho^2/rho0^2)^{-a(p-1)n/2},
///   F = -ab(p-1)R + cR/v,  L(F) = dF/dt.
struct SphereOracle {
  double R = 0.0;
  double v = 0.0;
  double F = 0.0;
  double LF = 0.0;
};
SphereOracle homogeneous_sphere_oracle(int n, double p, double a, double b, double c,
                                       double rho0_sq, double v0, double t);

}  // namespace rfpme::identities
