#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rfpme/runner.hpp"

namespace rfpme::runner {
namespace {

using nlohmann::json;

// JSON has no NaN or infinity; non-finite values become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json number_list(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

std::string manifold_name(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::FlatTorus: return "flat_torus";
    case ManifoldKind::RoundSphere: return "round_sphere";
    case ManifoldKind::RotSymSurface: return "rotsym_surface";
  }
  return "unknown";
}

std::string initial_kind(pme::InitialData::Kind k) {
  switch (k) {
    case pme::InitialData::Kind::Constant: return "constant";
    case pme::InitialData::Kind::Bump: return "bump";
    case pme::InitialData::Kind::Table: return "table";
  }
  return "unknown";
}

json config_json(const ScenarioConfig& c) {
  json m = {{"kind", manifold_name(c.manifold.kind)},
            {"n", c.manifold.n},
            {"intervals", c.manifold.intervals}};
  switch (c.manifold.kind) {
    case ManifoldKind::FlatTorus: m["lengths"] = number_list(c.manifold.lengths); break;
    case ManifoldKind::RoundSphere: m["r0_sq"] = number(c.manifold.r0_sq); break;
    case ManifoldKind::RotSymSurface:
      m["profile"] = c.manifold.profile;
      m["eps"] = number(c.manifold.eps);
      break;
  }
  json u0 = {{"kind", initial_kind(c.pme.u0.kind)},
             {"level", number(c.pme.u0.level)},
             {"amplitude", number(c.pme.u0.amplitude)},
             {"mode", c.pme.u0.mode}};
  if (c.pme.u0.kind == pme::InitialData::Kind::Table) u0["table"] = number_list(c.pme.u0.table);
  json pme = {{"p", number(c.pme.p)},         {"a", number(c.pme.a)},
              {"t0", number(c.pme.t0)},       {"T", number(c.pme.T)},
              {"dt", number(c.pme.dt)},       {"store_every", c.pme.store_every},
              {"c_cfl", number(c.pme.c_cfl)}, {"u0", u0}};
  json variants = json::array();
  for (auto v : c.checks.variants) variants.push_back(harnack::to_string(v));
  json checks = {{"variants", variants},
                 {"b", number_list(c.checks.b_values)},
                 {"identities", c.checks.identities},
                 {"lnvv_alpha", number_list(c.checks.lnvv_alpha)},
                 {"lyh", c.checks.lyh},
                 {"barenblatt", c.checks.barenblatt},
                 {"mass", c.checks.mass},
                 {"closed_form", c.checks.closed_form},
                 {"curves", c.checks.curves},
                 {"seed", c.checks.seed},
                 {"t_min_fraction", number(c.checks.t_min_fraction)}};
  json tol = {{"tol_ineq", number(c.tol.ineq)},
              {"tol_path", number(c.tol.path)},
              {"tol_hyp", number(c.tol.hyp)},
              {"tol_mass", number(c.tol.mass)},
              {"tol_identity", number(c.tol.identity)},
              {"tol_closed_form", number(c.tol.closed_form)}};
  return {{"name", c.name}, {"manifold", m}, {"pme", pme}, {"checks", checks}, {"tolerances", tol}};
}

json check_json(const CheckResult& c) {
  json j = {{"id", c.id},
            {"kind", c.kind},
            {"status", harnack::to_string(c.status)},
            {"value", number(c.value)},
            {"tolerance", number(c.tolerance)},
            {"node", c.node},
            {"time", number(c.time)},
            {"note", c.note}};
  if (!c.refinement.empty()) j["refinement"] = number_list(c.refinement);
  j["measured_order"] = c.measured_order ? number(*c.measured_order) : json(nullptr);
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  // Binary mode keeps LF line endings on every platform.
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string to_json(const RunSummary& s, bool include_wall_clock) {
  json checks = json::array();
  for (const auto& c : s.checks) checks.push_back(check_json(c));
  const auto& h = s.hypotheses;
  json j = {
      {"schema_version", kSchemaVersion},
      {"code_version", kCodeVersion},
      {"scenario", s.scenario},
      {"status", to_string(s.status)},
      {"exit_code", s.exit_code()},
      {"error", s.error},
      {"config", config_json(s.config)},
      {"hypotheses",
       {{"valid", h.valid()},
        {"curvature_nonneg", h.curvature_nonneg},
        {"pre_extinction", h.pre_extinction},
        {"R_min", number(h.r_min)},
        {"R_max", number(h.r_max)},
        {"R_min_node", h.r_min_node},
        {"R_min_time", number(h.r_min_time)},
        {"tol_hyp", number(h.tol_hyp)}}},
      {"run",
       {{"outer_steps", s.stats.outer_steps},
        {"substeps", s.stats.substeps},
        {"dt_outer", number(s.stats.dt_outer)},
        {"dt_step", number(s.stats.dt_step)},
        {"max_step_number", number(s.stats.max_step_number)},
        {"stored_states", s.stored_states},
        {"refine_levels", s.refine_levels}}},
      {"checks", checks},
  };
  if (include_wall_clock) j["wall_clock_seconds"] = number(s.wall_clock_seconds);
  // nlohmann::json objects are std::map based, so keys come out sorted.
  return j.dump(2) + "\n";
}

std::string to_csv(const RunSummary& s) {
  std::string out = "t,mass,R_max_t,u_min,u_max,v_min,v_max";
  for (double b : s.b_columns) out += ",worst_F_margin_b" + format_double(b);
  out += '\n';
  for (const auto& r : s.series) {
    out += format_double(r.t);
    for (double x : {r.mass, r.r_max, r.u_min, r.u_max, r.v_min, r.v_max})
      out += ',' + format_double(x);
    for (double m : r.margins) out += ',' + format_double(m);
    out += '\n';
  }
  return out;
}

std::string margin_table(const RunSummary& s) {
  std::ostringstream o;
  o << "scenario: " << s.scenario << "\n";
  o << "status:   " << to_string(s.status) << " (exit " << s.exit_code() << ")\n";
  if (!s.error.empty()) o << "error:    " << s.error << "\n";
  o << "hypotheses: " << (s.hypotheses.valid() ? "valid" : "INVALID")
    << "  R_min = " << format_double(s.hypotheses.r_min)
    << "  R_max = " << format_double(s.hypotheses.r_max) << "\n\n";
  o << std::left << std::setw(32) << "check" << std::setw(10) << "kind" << std::setw(9)
    << "status" << std::setw(24) << "worst value" << std::setw(12) << "tolerance"
    << std::setw(8) << "node" << std::setw(14) << "time" << "note\n";
  o << std::string(120, '-') << "\n";
  for (const auto& c : s.checks) {
    std::string note = c.note;
    if (c.measured_order) note += (note.empty() ? "" : "; ") + std::string("order ") +
                                  format_double(*c.measured_order);
    o << std::left << std::setw(32) << c.id << std::setw(10) << c.kind << std::setw(9)
      << harnack::to_string(c.status) << std::setw(24) << format_double(c.value) << std::setw(12)
      << format_double(c.tolerance) << std::setw(8) << c.node << std::setw(14)
      << format_double(c.time) << note << "\n";
  }
  return o.str();
}

void emit_report(const RunSummary& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.json", to_json(s));
  write_file(dir / "series.csv", to_csv(s));
  write_file(dir / "margins.txt", margin_table(s));
}

}  // namespace rfpme::runner
