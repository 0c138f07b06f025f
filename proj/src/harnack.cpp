#include "rfpme/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rfpme/geometry.hpp"
#include "rfpme/ricci_flow.hpp"

namespace rfpme::harnack {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double kappa_of(int n, double p) { return n / (2.0 + n * (p - 1.0)); }

// Worst (largest) margin bookkeeping shared by the pointwise checks.
struct Worst {
  double margin = -std::numeric_limits<double>::infinity();
  std::size_t node = 0;
  double time = 0.0;
  bool any = false;

  void offer(double m, std::size_t i, double t) {
    if (!any || m > margin) {
      margin = m;
      node = i;
      time = t;
      any = true;
    }
  }
};

MarginReport finish(std::string id, const Worst& w, double tol, std::vector<double> series) {
  MarginReport r;
  r.id = std::move(id);
  r.tolerance = tol;
  r.series = std::move(series);
  if (!w.any) {
    r.status = CheckStatus::Skipped;
    r.pass = false;
    r.worst_margin = kNaN;
    r.note = "no stored state satisfies t - t0 >= t_min";
    return r;
  }
  r.worst_margin = w.margin;
  r.node = w.node;
  r.time = w.time;
  r.pass = w.margin <= tol;
  r.status = r.pass ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1p-53; }

// Index of the stored interval [t_j, t_{j+1}] containing t.
std::size_t bracket(std::span<const double> times, double t) {
  if (t <= times.front()) return 0;
  if (t >= times.back()) return times.size() - 2;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

// R and g_ss at reduced coordinate s on the (already interpolated) state m,
// by linear interpolation between nodes.
std::pair<double, double> sample_metric(const ManifoldState& m, double s) {
  const double h = m.spacing();
  const std::size_t N = m.nodes();
  const auto R = m.curvature();
  const auto lambda = m.log_conformal();
  double x = s / h;
  std::size_t i0;
  double th;
  if (m.periodic()) {
    const double L = m.reduced().lengths[0];
    double w = std::fmod(s, L);
    if (w < 0) w += L;
    x = w / h;
    i0 = std::min(static_cast<std::size_t>(x), N - 1);
    th = x - static_cast<double>(i0);
    const std::size_t i1 = (i0 + 1) % N;
    const double r = (1 - th) * R[i0] + th * R[i1];
    const double a2 = (1 - th) * std::exp(2 * lambda[i0]) + th * std::exp(2 * lambda[i1]);
    return {r, a2};
  }
  x = std::clamp(x, 0.0, static_cast<double>(N - 1));
  i0 = std::min(static_cast<std::size_t>(x), N - 2);
  th = x - static_cast<double>(i0);
  const double r = (1 - th) * R[i0] + th * R[i0 + 1];
  const double a2 = (1 - th) * std::exp(2 * lambda[i0]) + th * std::exp(2 * lambda[i0 + 1]);
  return {r, a2};
}

// Metric at time t, interpolated between the bracketing stored states.
ManifoldState metric_at(const pme::Trajectory& traj, double t) {
  const auto j = bracket(traj.times(), t);
  return ricci_flow::interpolate_metric(traj.state(j), traj.state(j + 1), t);
}

// Signed displacement from s_a to s_b; shortest winding on the torus.
double displacement(const ManifoldState& m, double sa, double sb) {
  double d = sb - sa;
  if (m.periodic()) {
    const double L = m.reduced().lengths[0];
    d = std::remainder(d, L);
  }
  return d;
}

void validate_curve(const pme::Trajectory& traj, const SpaceTimeCurve& c) {
  if (c.s.size() != c.t.size() || c.s.size() < 2)
    throw std::invalid_argument("curve needs matching vertex lists with at least two vertices");
  if (c.state1 >= traj.size() || c.state2 >= traj.size() || !(c.state1 < c.state2))
    throw std::invalid_argument("curve endpoints must be stored states with t1 < t2");
  if (c.node1 >= traj.state(0).nodes() || c.node2 >= traj.state(0).nodes())
    throw std::invalid_argument("curve endpoint node outside the grid");
  if (!(traj.time(c.state1) - traj.t0() > 0.0))
    throw std::invalid_argument("curve must start after t0 (t1 > 0)");
  for (std::size_t k = 1; k < c.t.size(); ++k)
    if (!(c.t[k] > c.t[k - 1])) throw std::invalid_argument("curve times must increase");
  if (c.t.front() < traj.times().front() || c.t.back() > traj.times().back())
    throw std::invalid_argument("curve leaves the time window of the trajectory");
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Thm_1_1: return "Thm_1_1";
    case Variant::Thm_1_4: return "Thm_1_4";
    case Variant::Thm_b1_limit: return "Thm_b1_limit";
    case Variant::Thm_b1_bounded_grad: return "Thm_b1_bounded_grad";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (auto v : {Variant::Thm_1_1, Variant::Thm_1_4, Variant::Thm_b1_limit,
                 Variant::Thm_b1_bounded_grad})
    if (name == to_string(v)) return v;
  return std::nullopt;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "unknown";
}

HarnackConstants constants(int n, double p, double b, Variant variant) {
  if (n < 1) throw std::invalid_argument("Harnack constants need n >= 1");
  if (!(p > 1.0)) throw std::invalid_argument("Harnack constants need p > 1");
  HarnackConstants k;
  k.variant = variant;
  k.n = n;
  k.p = p;
  k.kappa = kappa_of(n, p);
  const double q = n * (p - 1.0);
  switch (variant) {
    case Variant::Thm_1_4:
      if (!(b >= 1.0) || !std::isfinite(b)) throw std::invalid_argument("Theorem 1.4 needs b >= 1");
      k.b = b;
      k.alpha = b * q / (2.0 + b * q);
      k.d = std::max(b * k.alpha, b / 2.0);
      k.c0 = b >= 2.0 ? 2.0 * k.alpha / n + std::sqrt(b * k.alpha * (p - 1.0) / 2.0)
                      : std::sqrt(b * k.alpha * (p - 1.0) * (n - 1.0) / (2.0 * n));
      break;
    case Variant::Thm_1_1:
      k.b = 2.0;
      k.alpha = q / (1.0 + q);
      k.d = std::max(2.0 * k.alpha, 1.0);
      k.c0 = 0.0;
      break;
    case Variant::Thm_b1_limit:
      k.b = 1.0;
      k.alpha = q / (2.0 + q);
      k.d = std::max(k.alpha, 0.5);
      k.c0 = std::sqrt(k.alpha * (p - 1.0) * (n - 1.0) / (2.0 * n));
      break;
    case Variant::Thm_b1_bounded_grad:
      // The theorem states d but leaves alpha implicit in C0; alpha = d here.
      k.b = 1.0;
      k.d = q / (2.0 + q);
      k.alpha = k.d;
      k.c0 = std::sqrt(k.alpha * (p - 1.0) * (n - 1.0) / (2.0 * n));
      break;
  }
  return k;
}

HarnackF harnack_F(const ManifoldState& m, const ScalarField& v, const ScalarField& v_t, double p,
                   double a, double b, double c) {
  if (!(v.min() > 0.0)) throw std::domain_error("harnack_F needs v > 0");
  m.require_on_grid(v);
  m.require_on_grid(v_t);
  const auto R = geometry::scalar_curvature(m);
  const auto grad = geometry::gradient_norm_sq(v, m);
  auto def = grad / v - b * (v_t / v) + c * (R / v);
  auto exp = -b * (p - 1.0) * geometry::laplacian(v, m) + (1.0 - b) * (grad / v) -
             a * b * (p - 1.0) * R + c * (R / v);
  auto diff = def - exp;
  return {std::move(def), std::move(exp), std::move(diff)};
}

MarginReport skipped(std::string id, std::string note) {
  MarginReport r;
  r.id = std::move(id);
  r.status = CheckStatus::Skipped;
  r.pass = false;
  r.worst_margin = kNaN;
  r.note = std::move(note);
  return r;
}

MarginReport theorem_margin(const pme::Trajectory& traj, const HarnackConstants& k, double t_min,
                            double tol) {
  if (!(t_min > 0.0)) throw std::invalid_argument("theorem_margin needs t_min > 0");
  const double r_max = traj.r_max();
  const double shift = k.c0 * std::abs(k.b - 2.0) * r_max;
  Worst w;
  std::vector<double> series(traj.size(), kNaN);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double tau = traj.time(j) - traj.t0();
    if (!(tau > 0.0)) continue;
    const auto& m = traj.state(j);
    const auto& v = traj.v(j);
    const auto R = geometry::scalar_curvature(m);
    const auto F = geometry::gradient_norm_sq(v, m) / v - k.b * (traj.v_t(j) / v) -
                   (k.b - 1.0) * (R / v);
    double worst_here = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < F.size(); ++i) {
      const double margin = F[i] - k.d / tau - shift;
      worst_here = std::max(worst_here, margin);
      if (tau >= t_min) w.offer(margin, i, traj.time(j));
    }
    series[j] = worst_here;
  }
  std::ostringstream id;
  id << to_string(k.variant) << "_b" << k.b;
  return finish(id.str(), w, tol, std::move(series));
}

MarginReport lnvv_check(const pme::Trajectory& traj, double alpha, double t_min, double tol) {
  if (traj.state(0).kind() != ManifoldKind::FlatTorus)
    throw std::invalid_argument("lnvv_check applies to the static flat torus only");
  if (!(alpha > 1.0)) throw std::invalid_argument("lnvv_check needs alpha > 1");
  const double p = traj.p();
  const double kappa = kappa_of(traj.state(0).dim(), p);
  Worst w;
  std::vector<double> series(traj.size(), kNaN);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double tau = traj.time(j) - traj.t0();
    if (!(tau > 0.0)) continue;
    const auto& m = traj.state(j);
    const auto& v = traj.v(j);
    const auto q = alpha * (traj.v_t(j) / v) - geometry::gradient_norm_sq(v, m) / v;
    double worst_here = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double margin = -(q[i] + (p - 1.0) * kappa * alpha * alpha / tau);
      worst_here = std::max(worst_here, margin);
      if (tau >= t_min) w.offer(margin, i, traj.time(j));
    }
    series[j] = worst_here;
  }
  std::ostringstream id;
  id << "lnvv_alpha" << alpha;
  return finish(id.str(), w, tol, std::move(series));
}

MarginReport lyh_check(const pme::Trajectory& traj, double t_min, double tol) {
  Worst w;
  std::vector<double> series(traj.size(), kNaN);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double tau = traj.time(j) - traj.t0();
    if (!(tau > 0.0)) continue;
    const auto& m = traj.state(j);
    const auto Q = ricci_flow::lyh_trace(m, ricci_flow::curvature_rate(traj.states(), j),
                                         -traj.v(j), tau);
    const auto range = geometry::interior_nodes(m);
    double worst_here = -std::numeric_limits<double>::infinity();
    for (std::size_t i = range.first; i < range.last; ++i) {
      worst_here = std::max(worst_here, -Q[i]);
      if (tau >= t_min) w.offer(-Q[i], i, traj.time(j));
    }
    series[j] = worst_here;
  }
  return finish("lyh_trace", w, tol, std::move(series));
}

double Barenblatt::kappa() const { return kappa_of(n, p); }
double Barenblatt::k2() const { return (p - 1.0) * kappa() / (2.0 * p * n); }

double Barenblatt::support_radius(double t) const {
  return std::sqrt(C * std::pow(t, 2.0 * kappa() / n) / k2());
}

double Barenblatt::pressure(double r, double t) const {
  const double inner = C - k2() * r * r * std::pow(t, -2.0 * kappa() / n);
  return p / (p - 1.0) * std::pow(t, -kappa() * (p - 1.0)) * std::max(inner, 0.0);
}

double classical_ab_check(const Barenblatt& b, double t, std::size_t samples) {
  if (!(t > 0.0)) throw std::invalid_argument("classical_ab_check needs t > 0");
  if (b.n < 1 || !(b.p > 1.0) || !(b.C > 0.0))
    throw std::invalid_argument("Barenblatt profile needs n >= 1, p > 1, C > 0");
  if (samples < 2) throw std::invalid_argument("classical_ab_check needs at least two samples");
  const double half = 0.5 * b.support_radius(t);
  const double h = half / static_cast<double>(samples);
  double worst = 0.0;
  // Radial samples r = i h on [0, half]; on n = 1 the profile is even, so
  // this covers the whole inner half of the support.
  for (std::size_t i = 0; i <= samples; ++i) {
    const double r = static_cast<double>(i) * h;
    const double vm = b.pressure(std::abs(r - h), t);
    const double v0 = b.pressure(r, t);
    const double vp = b.pressure(r + h, t);
    const double vrr = ((vp + vm) - (v0 + v0)) / (h * h);
    double lap = vrr;
    if (b.n > 1) lap = i == 0 ? b.n * vrr : vrr + (b.n - 1) / r * ((vp - vm) / (2.0 * h));
    worst = std::max(worst, std::abs(lap + b.kappa() / t));
  }
  return worst;
}

double curve_action(const pme::Trajectory& traj, const SpaceTimeCurve& curve, double b) {
  validate_curve(traj, curve);
  constexpr int kSub = 16;  // Simpson subintervals per segment (even)
  const auto& ref = traj.state(0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < curve.s.size(); ++k) {
    const double ta = curve.t[k], tb = curve.t[k + 1];
    const double ds = displacement(ref, curve.s[k], curve.s[k + 1]);
    const double speed_sq = (ds / (tb - ta)) * (ds / (tb - ta));
    const double step = (tb - ta) / kSub;
    double sum = 0.0;
    for (int q = 0; q <= kSub; ++q) {
      const double t = ta + step * q;
      const double s = curve.s[k] + ds * (static_cast<double>(q) / kSub);
      const auto [R, a2] = sample_metric(metric_at(traj, t), s);
      const double f = (b - 1.0) / b * R + b / 4.0 * a2 * speed_sq;
      const double weight = (q == 0 || q == kSub) ? 1.0 : (q % 2 == 1 ? 4.0 : 2.0);
      sum += weight * f;
    }
    total += sum * step / 3.0;
  }
  return total;
}

MarginReport path_harnack_check(const pme::Trajectory& traj, const HarnackConstants& k,
                                const SpaceTimeCurve& curve, PathForm form, double tol) {
  validate_curve(traj, curve);
  const double t1 = traj.time(curve.state1), t2 = traj.time(curve.state2);
  const double tau1 = t1 - traj.t0(), tau2 = t2 - traj.t0();
  const double v1 = traj.v(curve.state1)[curve.node1];
  const double v2 = traj.v(curve.state2)[curve.node2];
  const double r_max = traj.r_max();
  const double b = k.b;
  const double c0_term = std::abs(b - 2.0) / b * k.c0;
  double slack = 0.0;
  MarginReport r;
  if (form == PathForm::Multiplicative) {
    const double gamma = curve_action(traj, curve, b);
    const double log_rhs = std::log(v2) + k.d / b * std::log(tau2 / tau1) + gamma / traj.v_min() +
                           c0_term * r_max * (t2 - t1);
    slack = log_rhs - std::log(v1);
    r.id = "path_multiplicative_b" + std::to_string(b);
  } else {
    const double dist = geometry::geodesic_distance(traj.state(curve.state1), curve.node1,
                                                    curve.node2);
    const double v_max = traj.v_max();
    const double bound = -k.d / b * v_max * std::log(tau2 / tau1) -
                         ((b - 1.0) / b + c0_term * v_max) * r_max * (t2 - t1) -
                         b / 4.0 * dist * dist / (t2 - t1);
    slack = (v2 - v1) - bound;
    r.id = "path_additive_b" + std::to_string(b);
  }
  r.worst_margin = -slack;
  r.node = curve.node1;
  r.time = t1;
  r.tolerance = tol;
  r.pass = r.worst_margin <= tol;
  r.status = r.pass ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

SpaceTimeCurve random_curve(const pme::Trajectory& traj, std::uint64_t seed, std::size_t index,
                            double t_min, std::size_t interior_vertices) {
  std::vector<std::size_t> eligible;
  for (std::size_t j = 0; j < traj.size(); ++j)
    if (traj.time(j) - traj.t0() >= t_min && traj.time(j) > traj.t0()) eligible.push_back(j);
  if (eligible.size() < 2)
    throw std::invalid_argument("random_curve needs two stored states with t - t0 >= t_min");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 g(seq);
  const auto pick = [&](std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(g) * static_cast<double>(n)));
  };
  std::size_t a = pick(eligible.size());
  std::size_t b = pick(eligible.size() - 1);
  if (b >= a) ++b;
  if (a > b) std::swap(a, b);

  const auto& m = traj.state(0);
  SpaceTimeCurve c;
  c.state1 = eligible[a];
  c.state2 = eligible[b];
  c.node1 = pick(m.nodes());
  c.node2 = pick(m.nodes());
  const double t1 = traj.time(c.state1), t2 = traj.time(c.state2);
  const double extent = m.periodic() ? m.reduced().lengths[0] : m.coordinate(m.nodes() - 1);

  std::vector<double> times;
  for (std::size_t k = 0; k < interior_vertices; ++k) times.push_back(t1 + (t2 - t1) * uniform01(g));
  std::sort(times.begin(), times.end());
  c.s.push_back(m.coordinate(c.node1));
  c.t.push_back(t1);
  for (double t : times) {
    const double s = extent * uniform01(g);
    if (t > c.t.back() && t < t2) {
      c.s.push_back(s);
      c.t.push_back(t);
    }
  }
  c.s.push_back(m.coordinate(c.node2));
  c.t.push_back(t2);
  return c;
}

SpaceTimeCurve straight_curve(const pme::Trajectory& traj, std::size_t node1, std::size_t state1,
                              std::size_t node2, std::size_t state2) {
  SpaceTimeCurve c;
  c.node1 = node1;
  c.node2 = node2;
  c.state1 = state1;
  c.state2 = state2;
  const auto& m = traj.state(0);
  c.s = {m.coordinate(node1), m.coordinate(node2)};
  c.t = {traj.time(state1), traj.time(state2)};
  return c;
}

double lattice_action(const pme::Trajectory& traj, const SpaceTimeCurve& curve, double b,
                      std::size_t max_nodes) {
  validate_curve(traj, curve);
  const auto& ref = traj.state(0);
  const std::size_t N = ref.nodes();
  const std::size_t stride = std::max<std::size_t>(1, (N + max_nodes - 1) / max_nodes);
  std::vector<std::size_t> lattice;
  for (std::size_t i = 0; i < N; i += stride) lattice.push_back(i);
  for (std::size_t e : {curve.node1, curve.node2})
    if (std::find(lattice.begin(), lattice.end(), e) == lattice.end()) lattice.push_back(e);
  std::sort(lattice.begin(), lattice.end());
  const std::size_t L = lattice.size();
  const auto index_of = [&](std::size_t node) {
    return static_cast<std::size_t>(std::find(lattice.begin(), lattice.end(), node) -
                                    lattice.begin());
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(L, kInf), next(L);
  cost[index_of(curve.node1)] = 0.0;
  for (std::size_t j = curve.state1; j < curve.state2; ++j) {
    const auto& ma = traj.state(j);
    const auto& mb = traj.state(j + 1);
    const double dt = traj.time(j + 1) - traj.time(j);
    std::fill(next.begin(), next.end(), kInf);
    for (std::size_t x = 0; x < L; ++x) {
      if (cost[x] == kInf) continue;
      const std::size_t ia = lattice[x];
      const double ra = ma.curvature()[ia];
      const double a2a = std::exp(2 * ma.log_conformal()[ia]);
      for (std::size_t y = 0; y < L; ++y) {
        const std::size_t ib = lattice[y];
        const double ds = displacement(ref, ref.coordinate(ia), ref.coordinate(ib));
        const double rb = mb.curvature()[ib];
        const double a2b = std::exp(2 * mb.log_conformal()[ib]);
        const double seg = dt * ((b - 1.0) / b * 0.5 * (ra + rb)) +
                           b / 4.0 * 0.5 * (a2a + a2b) * ds * ds / dt;
        next[y] = std::min(next[y], cost[x] + seg);
      }
    }
    std::swap(cost, next);
  }
  return cost[index_of(curve.node2)];
}

MarginReport path_harnack_sweep(const pme::Trajectory& traj, const HarnackConstants& k,
                                PathForm form, std::uint64_t seed, std::size_t count,
                                double t_min, double tol) {
  MarginReport worst;
  bool first = true;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto curve = random_curve(traj, seed, i, t_min);
    auto r = path_harnack_check(traj, k, curve, form, tol);
    if (!r.pass) ++failures;
    if (first || r.worst_margin > worst.worst_margin) {
      worst = std::move(r);
      worst.note = "curve " + std::to_string(i);
      first = false;
    }
  }
  if (first) return skipped(form == PathForm::Multiplicative ? "path_multiplicative"
                                                             : "path_additive",
                            "no curves requested");
  std::ostringstream id;
  id << (form == PathForm::Multiplicative ? "path_multiplicative" : "path_additive") << "_b"
     << k.b;
  worst.id = id.str();
  worst.note += "; " + std::to_string(count) + " curves, " + std::to_string(failures) + " failed";
  worst.pass = failures == 0;
  worst.status = worst.pass ? CheckStatus::Pass : CheckStatus::Fail;
  return worst;
}

}  // namespace rfpme::harnack
