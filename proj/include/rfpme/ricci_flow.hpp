#pragma once

// Ricci flow dg/dt = -2 Rc on the model families.
//
// The torus is static. The round sphere is evolved exactly,
// rho^2(t) = rho^2(t0) - 2(n-1)(t - t0). The surface is conformal in 2D
// (Rc = (R/2) g), so the flow reduces to d(lambda)/dt = -R/2 for the log
// conformal factor; this is stepped with explicit RK4. Semi-discretely the
// reduced flow satisfies dR/dt = Delta R + R^2 exactly, so discrete scalar
// curvature evolution residuals are purely temporal.

#include <cstddef>
#include <span>

#include "rfpme/field.hpp"
#include "rfpme/manifold.hpp"

namespace rfpme::ricci_flow {

/// Largest accepted explicit step number dt * D / h^2 for diffusivity D on a
/// grid of dimension n. RK4 is stable up to |z| ~ 2.78 and the reduced
/// Laplacian has spectral radius at most max(4, 2n) / h^2; the limit keeps a
/// safety margin of about 1.4 below that.
double explicit_stability_limit(int dim);

/// dt * max(g^ss) / h^2, the step number of the surface metric diffusion.
double metric_step_number(const ManifoldState& m, double dt);

/// Time at which the family shrinks to a point: t + rho^2 / (2(n-1)) on the
/// sphere, t + Area / (8 pi) on the surface (Gauss-Bonnet), +inf on the torus.
double extinction_time(const ManifoldState& m);

/// One step of Ricci flow. Throws ExtinctionError when the step would reach
/// the extinction time, CflViolation when the surface step number exceeds
/// explicit_stability_limit, PositivityLoss when the surface scale degenerates.
ManifoldState evolve_metric(const ManifoldState& m, double dt);

/// Metric at time t between m0 and m1 = evolve_metric(m0, dt). Exact on the
/// sphere (rho^2 is linear in t); cubic Hermite in lambda on the surface,
/// using d(lambda)/dt = -R/2 at both ends.
ManifoldState interpolate_metric(const ManifoldState& m0, const ManifoldState& m1, double t);

/// dR/dt at stored state `idx`: closed form 2R^2/n on the sphere, zero on
/// the torus, three-point time differencing over `states` on the surface.
ScalarField curvature_rate(std::span<const ManifoldState> states, std::size_t idx);

/// max |dR/dt - Delta R - 2|Rc|^2| over all nodes of the stored states,
/// excluding the first and last one (one-sided time stencils).
double scalar_evolution_residual(std::span<const ManifoldState> states);

/// Hamilton's trace quantity for the 1-form V = grad(phi):
///   Q = t dR/dt + R + 2t <grad R, V> + 2t Rc(V, V).
/// The paper's Q uses V = -grad v, i.e. phi = -v. Requires t > 0.
ScalarField lyh_trace(const ManifoldState& m, const ScalarField& dRdt, const ScalarField& phi,
                      double t);

struct FlowHypothesisReport {
  double r_min = 0.0;
  double r_max = 0.0;
  bool curvature_nonneg = true;
  bool pre_extinction = true;
  // Space-time location of r_min.
  std::size_t r_min_node = 0;
  double r_min_time = 0.0;
  double tol_hyp = 1e-8;

  bool valid() const noexcept { return curvature_nonneg && pre_extinction; }
};

/// Scans R over every stored state. In 2D, R >= 0 is equivalent to a
/// nonnegative curvature operator; on the round sphere it is automatic.
FlowHypothesisReport verify_hypotheses(std::span<const ManifoldState> states,
                                       double tol_hyp = 1e-8);

}  // namespace rfpme::ricci_flow
