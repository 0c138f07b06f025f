#pragma once

// Harnack constants, the quantity F, and worst-case margins of the global
// differential Harnack estimates and their integrated (path) forms.
//
// Margins follow one sign convention: worst_margin <= 0 means the estimate
// holds, and a report passes when worst_margin <= tolerance.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfpme/field.hpp"
#include "rfpme/manifold.hpp"
#include "rfpme/pme.hpp"

namespace rfpme::harnack {

enum class Variant { Thm_1_1, Thm_1_4, Thm_b1_limit, Thm_b1_bounded_grad };

std::string to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct HarnackConstants {
  Variant variant = Variant::Thm_1_4;
  int n = 1;
  double p = 2.0;
  double b = 2.0;
  double alpha = 0.0;
  double d = 0.0;
  double c0 = 0.0;
  double kappa = 0.0;
};

/// Constants of each theorem variant. Thm_1_1 fixes b = 2 and the two b = 1
/// variants fix b = 1; the `b` argument is used by Thm_1_4 only. Throws
/// std::invalid_argument for n < 1, p <= 1 or (Thm_1_4) b < 1.
HarnackConstants constants(int n, double p, double b, Variant variant);

/// F = |grad v|^2/v - b v_t/v + c R/v in both of its forms:
///   definition: from the stored v_t;
///   expanded:   -b(p-1) Delta v + (1-b)|grad v|^2/v - ab(p-1) R + c R/v,
///               which substitutes the pressure equation for v_t;
///   difference: definition - expanded, a consistency diagnostic.
struct HarnackF {
  ScalarField definition;
  ScalarField expanded;
  ScalarField difference;
};
HarnackF harnack_F(const ManifoldState& m, const ScalarField& v, const ScalarField& v_t, double p,
                   double a, double b, double c);

enum class CheckStatus { Pass, Fail, Skipped };
std::string to_string(CheckStatus s);

struct MarginReport {
  std::string id;
  double worst_margin = 0.0;
  std::size_t node = 0;
  double time = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  CheckStatus status = CheckStatus::Pass;
  std::string note;
  /// Worst margin per stored state (NaN where the check does not apply).
  std::vector<double> series;
};

/// Marks a report skipped (hypotheses invalid): neither pass nor fail.
MarginReport skipped(std::string id, std::string note);

/// |grad v|^2/v - b v_t/v - (b-1)R/v - d/t - c0|b-2| R_max over all nodes and
/// stored states with t - t0 >= t_min; t is measured from the start t0.
MarginReport theorem_margin(const pme::Trajectory& traj, const HarnackConstants& k, double t_min,
                            double tol = 1e-2);

/// Eq (1.5) with K = 0 on a static flat torus:
/// margin = -[alpha v_t/v - |grad v|^2/v + (p-1) kappa alpha^2 / t].
/// Throws std::invalid_argument on other families or alpha <= 1.
MarginReport lnvv_check(const pme::Trajectory& traj, double alpha, double t_min,
                        double tol = 1e-2);

/// Hamilton's trace estimate with V = -grad v: margin = -Q over interior
/// nodes and stored states with t - t0 >= t_min.
MarginReport lyh_check(const pme::Trajectory& traj, double t_min, double tol = 1e-2);

/// Barenblatt solution on flat R^n:
///   v = (p/(p-1)) t^{-kappa(p-1)} (C - k2 |x|^2 t^{-2 kappa/n}),
///   k2 = (p-1) kappa / (2 p n).
struct Barenblatt {
  int n = 1;
  double p = 2.0;
  double C = 1.0;

  double kappa() const;
  double k2() const;
  double support_radius(double t) const;
  double pressure(double r, double t) const;
};

/// max |Delta v + kappa/t| over the inner half of the support, with Delta
/// the centered radial difference (exact for quadratics) of the closed form.
double classical_ab_check(const Barenblatt& profile, double t, std::size_t samples = 64);

/// Piecewise-linear space-time path through (s_k, t_k) with increasing t_k.
/// The endpoints sit on grid nodes at stored times.
struct SpaceTimeCurve {
  std::size_t node1 = 0, node2 = 0;   // endpoint nodes
  std::size_t state1 = 0, state2 = 0; // endpoint stored-state indices
  std::vector<double> s;              // all vertices, endpoints included
  std::vector<double> t;
};

enum class PathForm { Multiplicative, Additive };

/// Action Gamma_gamma = int ((b-1)/b R + (b/4)|gamma'|^2) d tau along the curve,
/// composite Simpson per segment with R and g_ss interpolated from the
/// stored states.
double curve_action(const pme::Trajectory& traj, const SpaceTimeCurve& curve, double b);

/// Signed slack of the integrated Harnack inequality along one curve:
/// multiplicative: ln RHS - ln v(x1, t1) for the per-curve Corollary 1.2 form;
/// additive: (v2 - v1) minus the Corollary 1.3 lower bound with the
/// time-t1 distance. The report's worst_margin is -slack.
MarginReport path_harnack_check(const pme::Trajectory& traj, const HarnackConstants& k,
                                const SpaceTimeCurve& curve, PathForm form, double tol = 1e-6);

/// Curves with uniformly random endpoints (stored times with t - t0 >= t_min)
/// and `interior_vertices` random intermediate vertices. Curve i depends only
/// on (seed, i).
SpaceTimeCurve random_curve(const pme::Trajectory& traj, std::uint64_t seed, std::size_t index,
                            double t_min, std::size_t interior_vertices = 3);

/// Constant-speed straight curve between two nodes (a time-t1 geodesic in
/// the symmetry class).
SpaceTimeCurve straight_curve(const pme::Trajectory& traj, std::size_t node1, std::size_t state1,
                              std::size_t node2, std::size_t state2);

/// Minimum action over space-time lattice paths between the endpoints of
/// `curve` (stored times x at most `max_nodes` spatial nodes), with straight
/// segment quadrature. An upper bound on the infimum Gamma; diagnostic only.
double lattice_action(const pme::Trajectory& traj, const SpaceTimeCurve& curve, double b,
                      std::size_t max_nodes = 64);

/// Runs path_harnack_check over `count` random curves and reduces to the
/// worst one.
MarginReport path_harnack_sweep(const pme::Trajectory& traj, const HarnackConstants& k,
                                PathForm form, std::uint64_t seed, std::size_t count,
                                double t_min, double tol = 1e-6);

}  // namespace rfpme::harnack
