#pragma once

// Forced porous medium equation u_t = Delta_{g(t)} u^p + a R u, solved by the
// method of lines with explicit RK4, coupled to the Ricci flow of the
// underlying model manifold. The paper's equation is a = 1; general a feeds
// the Proposition 2.1 identity checks.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rfpme/field.hpp"
#include "rfpme/manifold.hpp"

namespace rfpme::pme {

/// Initial data menu.
struct InitialData {
  enum class Kind { Constant, Bump, Table };
  Kind kind = Kind::Constant;
  double level = 1.0;      // constant part
  double amplitude = 0.0;  // cosine bump amplitude, |amplitude| < level
  int mode = 1;            // cos(mode * 2 pi x / L) on the torus, cos(mode * s) otherwise
  std::vector<double> table;  // node values for Kind::Table

  /// Samples the data on m. Throws std::invalid_argument for nonpositive data
  /// or a table of the wrong length.
  ScalarField sample(const ManifoldState& m) const;
};

struct PmeParams {
  double p = 2.0;
  double a = 1.0;
  InitialData u0;
  double t0 = 0.0;
  double T = 1.0;
  double dt = 1e-3;            // outer step; subdivided when the CFL bound is tighter
  std::size_t store_every = 1; // outer steps between stored states
  std::vector<double> b_list;  // Harnack parameters evaluated downstream
  double c_cfl = 0.2;
};

/// Source term S(x, t) for manufactured runs, evaluated on the state at time t.
using Source = std::function<ScalarField(const ManifoldState&)>;

/// v = (p/(p-1)) u^{p-1}. Throws PositivityLoss for nonpositive u.
ScalarField pressure(const ScalarField& u, double p);

/// Right side Delta(u^p) + a R u (+ S) on state m.
ScalarField rhs(const ScalarField& u, const ManifoldState& m, double p, double a,
                const Source* source = nullptr);

/// Explicit step number dt * p * max(u)^{p-1} * max(g^ss) / h^2.
double step_number(const ScalarField& u, const ManifoldState& m, double p, double dt);

/// One RK4 step from m to m_next = evolve_metric(m, dt). Intermediate stages
/// use the interpolated metric at t + dt/2. Throws CflViolation when the step
/// number exceeds the stability limit and PositivityLoss when u loses
/// positivity.
ScalarField step(const ScalarField& u, const ManifoldState& m, const ManifoldState& m_next,
                 const PmeParams& params, const Source* source = nullptr);

struct RunStats {
  std::size_t outer_steps = 0;
  std::size_t substeps = 1;      // RK4 steps per outer step
  double dt_outer = 0.0;
  double dt_step = 0.0;          // dt_outer / substeps
  double max_step_number = 0.0;  // largest step number met during the run
};

/// Stored states of a coupled run with the pressure and its time derivative.
/// v_t is taken by second-order time differencing of the stored v, never
/// from the PDE right side.
class Trajectory {
 public:
  Trajectory(std::vector<ManifoldState> states, std::vector<ScalarField> u, double p, double a,
             RunStats stats = {});

  std::size_t size() const noexcept { return states_.size(); }
  std::span<const ManifoldState> states() const noexcept { return states_; }
  const ManifoldState& state(std::size_t j) const { return states_.at(j); }
  const ScalarField& u(std::size_t j) const { return u_.at(j); }
  const ScalarField& v(std::size_t j) const { return v_.at(j); }
  const ScalarField& v_t(std::size_t j) const { return v_t_.at(j); }
  std::span<const ScalarField> u_series() const noexcept { return u_; }
  std::span<const ScalarField> v_series() const noexcept { return v_; }
  double time(std::size_t j) const { return times_.at(j); }
  std::span<const double> times() const noexcept { return times_; }
  double t0() const noexcept { return times_.front(); }
  double p() const noexcept { return p_; }
  double a() const noexcept { return a_; }
  const RunStats& stats() const noexcept { return stats_; }

  /// Extremes over every stored state and node.
  double v_min() const;
  double v_max() const;
  double r_max() const;

 private:
  std::vector<ManifoldState> states_;
  std::vector<ScalarField> u_, v_, v_t_;
  std::vector<double> times_;
  double p_;
  double a_;
  RunStats stats_;
};

/// Runs the coupled system over [t0, T] from params.u0. The configured dt is
/// an upper bound: each outer step is split into the smallest number of equal
/// RK4 steps that meets c_cfl against a forecast of max(u) and min(g_ss) at
/// T. Every step re-checks the step number and aborts above the stability
/// limit. States are stored every store_every outer steps.
Trajectory run(const PmeParams& params, const ManifoldState& m0);
Trajectory run(const PmeParams& params, const ManifoldState& m0, const ScalarField& u0,
               const Source* source = nullptr);

/// (t, integral of u dmu_{g(t)}) at every stored state.
std::vector<std::pair<double, double>> mass(const Trajectory& traj);

/// max_t |mass(t)/mass(t0) - 1|.
double max_mass_drift(const Trajectory& traj);

/// max over interior nodes and stored states (excluding the endpoints) of
/// |v_t - ((p-1) v Delta v + |grad v|^2 + a(p-1) R v)|.
double pressure_equation_residual(const Trajectory& traj);

/// Prescribed smooth positive solution u*(s, t) of a symmetric problem with
/// its derivatives in the reduced coordinate.
struct ExactSolution {
  std::function<double(double, double)> value, ds, dss, dt;
};

/// S = u*_t - Delta(u*^p) - a R u* with the Laplacian evaluated in closed
/// form. Torus and round sphere only.
ScalarField manufactured_source(const ExactSolution& exact, const ManifoldState& m, double p,
                                double a);

struct ManufacturedResult {
  Trajectory trajectory;
  double max_error = 0.0;  // max |u - u*| over stored states and nodes
};

ManufacturedResult manufactured_run(const PmeParams& params, const ManifoldState& m0,
                                    const ExactSolution& exact);

}  // namespace rfpme::pme
