#pragma once

// Discrete differential geometry on symmetry-reduced grids.
//
// All operators are second-order centered differences. On the sphere and the
// surface the pole nodes use the smooth-closure (L'Hopital) limits, and the
// Laplacian is in conservative flux form so that integrate(laplacian(f)) = 0
// holds to roundoff.

#include <cstddef>

#include "rfpme/field.hpp"
#include "rfpme/manifold.hpp"

namespace rfpme::geometry {

ScalarField laplacian(const ScalarField& f, const ManifoldState& m);

/// g^{ss} f_s^2.
ScalarField gradient_norm_sq(const ScalarField& f, const ManifoldState& m);

/// <grad f, grad g> = g^{ss} f_s g_s.
ScalarField gradient_dot(const ScalarField& f, const ScalarField& g, const ManifoldState& m);

/// Orthonormal-frame Hessian of a symmetric function: `radial` is the
/// meridian-meridian entry, `angular` the entry repeated on each of the
/// fiber_dim fiber directions (empty multiplicity on the torus).
struct HessianDiagonal {
  ScalarField radial;
  ScalarField angular;
  int angular_multiplicity = 0;
};
HessianDiagonal hessian(const ScalarField& f, const ManifoldState& m);

ScalarField hessian_norm_sq(const ScalarField& f, const ManifoldState& m);
ScalarField hessian_trace(const ScalarField& f, const ManifoldState& m);

/// Integral of f against the Riemannian volume of m.
double integrate(const ScalarField& f, const ManifoldState& m);

ScalarField scalar_curvature(const ManifoldState& m);

/// Rc(grad f, grad f). Every family here has Rc = (R/n) g pointwise.
ScalarField ricci_quadratic(const ScalarField& f, const ManifoldState& m);

/// |Rc|^2 = R^2 / n.
ScalarField ricci_norm_sq(const ManifoldState& m);

/// Rc_ij (grad^2 f)_ij.
ScalarField ricci_hessian_contraction(const ScalarField& f, const ManifoldState& m);

/// Distance between two nodes within the symmetry class: winding-minimal on
/// the torus, along the meridian on the sphere and the surface.
double geodesic_distance(const ManifoldState& m, std::size_t x1, std::size_t x2);

/// Scale factor e^{lambda} (= sqrt(g_ss)) at a node.
double length_scale(const ManifoldState& m, std::size_t node);

/// Half-open node range [first, last) used for interior-only checks: every
/// node on the torus; on the sphere and the surface the poles and their
/// neighbours are skipped, where the closure stencils have different error
/// constants.
struct NodeRange {
  std::size_t first = 0;
  std::size_t last = 0;
};
NodeRange interior_nodes(const ManifoldState& m);

}  // namespace rfpme::geometry
