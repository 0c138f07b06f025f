#pragma once

// Second-order time differencing over a stored series.

#include <cstddef>
#include <span>
#include <vector>

#include "rfpme/field.hpp"

namespace rfpme {

/// d/dt of `series` at index `idx`, given strictly increasing `times`.
/// Interior indices use the three-point centered formula (exact for
/// quadratics on non-uniform spacing); the endpoints use the one-sided
/// three-point formula. Needs at least three samples.
ScalarField time_derivative(std::span<const ScalarField> series, std::span<const double> times,
                            std::size_t idx);

/// Same, for a scalar series.
double time_derivative(std::span<const double> series, std::span<const double> times,
                       std::size_t idx);

/// Least-squares slope of log(error) against log(h) over successive
/// refinements: the observed order of convergence. `errors[k]` belongs to the
/// k-th refinement, each dividing the spacing by `ratio`. Returns +inf when
/// any error is exactly zero.
double measured_order(std::span<const double> errors, double ratio = 2.0);

}  // namespace rfpme
