// Config grammar: INI-style sections of key = value lines; ';' or '#' start
// comments. Every key belongs to exactly one section, so a key may also be
// written before the first section header. Lists are separated by spaces or
// commas.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rfpme/geometry.hpp"
#include "rfpme/ricci_flow.hpp"
#include "rfpme/runner.hpp"

namespace rfpme::runner {
namespace {

struct KeyInfo {
  const char* section;
  const char* key;
  const char* fallback;
  const char* help;
};

// The complete key table; config_help() prints it.
constexpr KeyInfo kKeys[] = {
    {"scenario", "name", "scenario", "scenario id used in reports and output paths"},
    {"manifold", "kind", "flat_torus", "flat_torus | round_sphere | rotsym_surface"},
    {"manifold", "n", "1", "dimension (torus >= 1, sphere >= 2, surface = 2)"},
    {"manifold", "r0_sq", "1", "round_sphere: initial rho^2 > 0"},
    {"manifold", "lengths", "2pi per side", "flat_torus: n side lengths > 0"},
    {"manifold", "profile", "round", "rotsym_surface: round | perturbed | dumbbell"},
    {"manifold", "eps", "0", "rotsym_surface: profile parameter"},
    {"manifold", "intervals", "256", "grid intervals N >= 16"},
    {"pme", "p", "2", "PME exponent p > 1"},
    {"pme", "a", "1", "curvature coupling a in u_t = Delta u^p + a R u"},
    {"pme", "u0", "constant", "initial data: constant | bump"},
    {"pme", "u0_level", "1", "constant part of u0 (> 0)"},
    {"pme", "u0_amplitude", "0", "bump amplitude, |amplitude| < level"},
    {"pme", "u0_mode", "1", "bump mode >= 1"},
    {"pme", "t0", "0", "start time >= 0"},
    {"pme", "T", "1", "end time > t0, before extinction"},
    {"pme", "dt", "1e-3", "outer step; (T - t0)/dt must be an integer"},
    {"pme", "store_every", "1", "outer steps between stored states"},
    {"pme", "c_cfl", "0.2", "target explicit step number (0, 0.25]"},
    {"checks", "variants", "Thm_1_1 Thm_1_4 Thm_b1_limit Thm_b1_bounded_grad",
     "Harnack theorem variants"},
    {"checks", "b", "1 1.5 2 3 5", "Theorem 1.4 parameters b >= 1 (also CSV columns)"},
    {"checks", "identities", "", "prop21 prop22 quotient_rule bochner yz_decomposition"},
    {"checks", "lnvv_alpha", "", "eq (1.5) alphas > 1 (flat_torus only)"},
    {"checks", "lyh", "true", "Hamilton trace estimate with V = -grad v"},
    {"checks", "barenblatt", "false", "Aronson-Benilan equality on the Barenblatt profile"},
    {"checks", "mass", "true", "mass conservation audit"},
    {"checks", "closed_form", "true", "closed-form audit for constant data (torus, sphere)"},
    {"checks", "curves", "100", "random space-time curves per path check"},
    {"checks", "seed", "20240601", "curve sampling seed"},
    {"checks", "t_min_fraction", "0.05", "t_min = fraction * (T - t0), in (0, 1)"},
    {"tolerances", "tol_ineq", "1e-2", "differential Harnack margins"},
    {"tolerances", "tol_path", "1e-6", "path Harnack slack"},
    {"tolerances", "tol_hyp", "1e-8", "curvature sign hypothesis"},
    {"tolerances", "tol_mass", "1e-6", "relative mass drift"},
    {"tolerances", "tol_identity", "1e-2", "absolute identity residuals"},
    {"tolerances", "tol_closed_form", "1e-6", "relative closed-form error"},
    {"output", "dir", "", "output directory (overridden by --out)"},
};

const KeyInfo* find_key(std::string_view key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                        std::tolower(static_cast<unsigned char>(b[j - 1]));
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (same ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string suggestion(std::string_view unknown) {
  const KeyInfo* best = nullptr;
  std::size_t best_d = std::string_view::npos;
  for (const auto& k : kKeys) {
    const std::string_view name = k.key;
    std::size_t d = edit_distance(unknown, name);
    // A known key containing the typo (alpha -> lnvv_alpha) is a strong hint;
    // one-letter keys such as p are too short to count as containment.
    const auto contains = [](std::string_view hay, std::string_view needle) {
      return needle.size() >= 3 && hay.find(needle) != std::string_view::npos;
    };
    if (contains(name, unknown) || contains(unknown, name)) d = std::min<std::size_t>(d, 1);
    if (d < best_d) {
      best_d = d;
      best = &k;
    }
  }
  if (best == nullptr || best_d > std::max<std::size_t>(2, unknown.size() / 2)) return "";
  return std::string("; did you mean '") + best->key + "' in [" + best->section + "]?";
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) return std::nullopt;
  return x;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  std::uint64_t x = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return x;
}

// Collects values and errors while reading the flat key map.
class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  std::vector<std::string> errors;

  bool has(const char* key) const { return values_.count(key) > 0; }

  std::string text(const char* key, std::string fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double number(const char* key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (auto x = to_double(it->second)) return *x;
    errors.push_back(where(key) + " = '" + it->second + "' is not a finite number");
    return fallback;
  }

  std::uint64_t integer(const char* key, std::uint64_t fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (auto x = to_uint(it->second)) return *x;
    errors.push_back(where(key) + " = '" + it->second + "' is not a nonnegative integer");
    return fallback;
  }

  bool boolean(const char* key, bool fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    errors.push_back(where(key) + " = '" + s + "' is not a boolean (true/false)");
    return fallback;
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) {
      if (auto x = to_double(item))
        out.push_back(*x);
      else
        errors.push_back(where(key) + ": list item '" + item + "' is not a finite number");
    }
    return out;
  }

  std::vector<std::string> words(const char* key, std::vector<std::string> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return split_list(it->second);
  }

  void require(bool ok, const char* key, const std::string& message) {
    if (!ok) errors.push_back(where(key) + ": " + message);
  }

  static std::string where(const char* key) {
    const auto* info = find_key(key);
    return std::string("[") + (info ? info->section : "?") + "] " + key;
  }

 private:
  std::map<std::string, std::string> values_;
};

std::string fmt(double x) { return format_double(x); }

}  // namespace

const std::vector<std::string>& identity_ids() {
  static const std::vector<std::string> ids{"prop21", "prop22", "quotient_rule", "bochner",
                                            "yz_decomposition"};
  return ids;
}

std::string config_help() {
  std::ostringstream out;
  out << "Config files are INI-style: [section] headers, key = value lines, ';' or '#'\n"
         "comments, lists separated by spaces or commas. Keys are unique across\n"
         "sections and may also appear before the first header. Unknown keys are errors.\n";
  std::string section;
  for (const auto& k : kKeys) {
    if (section != k.section) {
      section = k.section;
      out << "\n[" << section << "]\n";
    }
    std::string left = std::string("  ") + k.key + " (default: " + k.fallback + ")";
    out << left;
    if (left.size() < 44) out << std::string(44 - left.size(), ' ');
    out << "  " << k.help << '\n';
  }
  return out.str();
}

ConfigResult parse_config(std::string_view text) {
  ConfigResult result;
  boost::property_tree::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    result.errors.push_back("line " + std::to_string(e.line()) + ": " + e.message());
    return result;
  }

  // Flatten, checking that every key exists and sits in its own section.
  std::map<std::string, std::string> values;
  const auto add = [&](const std::string& section, const std::string& key,
                       const std::string& value) {
    const auto* info = find_key(key);
    if (info == nullptr) {
      result.errors.push_back("unknown key '" + key + "'" +
                              (section.empty() ? "" : " in [" + section + "]") + suggestion(key));
      return;
    }
    if (!section.empty() && section != info->section) {
      result.errors.push_back("key '" + key + "' belongs in [" + info->section + "], not [" +
                              section + "]");
      return;
    }
    if (values.count(key)) {
      result.errors.push_back("key '" + key + "' given twice");
      return;
    }
    values[key] = trim(value);
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      add("", name, node.data());
      continue;
    }
    bool known_section = false;
    for (const auto& k : kKeys) known_section |= (name == k.section);
    if (!known_section) {
      result.errors.push_back("unknown section [" + name + "]");
      continue;
    }
    for (const auto& [key, leaf] : node) add(name, key, leaf.data());
  }

  Reader r(std::move(values));
  ScenarioConfig cfg;
  cfg.name = r.text("name", "scenario");
  r.require(!cfg.name.empty() && cfg.name.find_first_of("/\\") == std::string::npos, "name",
            "must be non-empty without path separators");

  // Manifold.
  auto& ms = cfg.manifold;
  const auto kind = r.text("kind", "flat_torus");
  bool kind_ok = true;
  if (kind == "flat_torus")
    ms.kind = ManifoldKind::FlatTorus;
  else if (kind == "round_sphere")
    ms.kind = ManifoldKind::RoundSphere;
  else if (kind == "rotsym_surface")
    ms.kind = ManifoldKind::RotSymSurface;
  else {
    kind_ok = false;
    r.errors.push_back("[manifold] kind = '" + kind +
                       "' is not one of flat_torus, round_sphere, rotsym_surface");
  }
  const int default_n = ms.kind == ManifoldKind::FlatTorus ? 1 : 2;
  ms.n = static_cast<int>(r.integer("n", default_n));
  if (ms.kind == ManifoldKind::FlatTorus) r.require(ms.n >= 1, "n", "flat_torus needs n >= 1");
  if (ms.kind == ManifoldKind::RoundSphere) r.require(ms.n >= 2, "n", "round_sphere needs n >= 2");
  if (ms.kind == ManifoldKind::RotSymSurface)
    r.require(ms.n == 2, "n", "rotsym_surface is two-dimensional (n = 2)");
  ms.r0_sq = r.number("r0_sq", 1.0);
  r.require(ms.r0_sq > 0.0, "r0_sq", "must be > 0, got " + fmt(ms.r0_sq));
  ms.lengths = r.numbers("lengths", std::vector<double>(std::max(ms.n, 1), 2.0 * std::numbers::pi));
  if (ms.kind == ManifoldKind::FlatTorus) {
    r.require(ms.lengths.size() == static_cast<std::size_t>(std::max(ms.n, 1)), "lengths",
              "needs exactly n = " + std::to_string(ms.n) + " values, got " +
                  std::to_string(ms.lengths.size()));
    for (double L : ms.lengths) r.require(L > 0.0, "lengths", "side lengths must be > 0");
  } else {
    r.require(!r.has("lengths"), "lengths", "applies to flat_torus only");
  }
  ms.profile = r.text("profile", "round");
  r.require(ms.profile == "round" || ms.profile == "perturbed" || ms.profile == "dumbbell",
            "profile", "'" + ms.profile + "' is not one of round, perturbed, dumbbell");
  if (ms.kind != ManifoldKind::RotSymSurface)
    r.require(!r.has("profile") && !r.has("eps"), "profile",
              "profile and eps apply to rotsym_surface only");
  if (ms.kind != ManifoldKind::RoundSphere)
    r.require(!r.has("r0_sq"), "r0_sq", "applies to round_sphere only");
  ms.eps = r.number("eps", 0.0);
  ms.intervals = r.integer("intervals", 256);
  r.require(ms.intervals >= 16, "intervals", "needs N >= 16, got " + std::to_string(ms.intervals));
  r.require(ms.intervals <= (1u << 20), "intervals", "is unreasonably large");

  // PME.
  auto& pp = cfg.pme;
  pp.p = r.number("p", 2.0);
  r.require(pp.p > 1.0, "p", "needs p > 1, got " + fmt(pp.p));
  pp.a = r.number("a", 1.0);
  const auto u0 = r.text("u0", "constant");
  if (u0 == "constant")
    pp.u0.kind = pme::InitialData::Kind::Constant;
  else if (u0 == "bump")
    pp.u0.kind = pme::InitialData::Kind::Bump;
  else
    r.errors.push_back("[pme] u0 = '" + u0 + "' is not one of constant, bump");
  pp.u0.level = r.number("u0_level", 1.0);
  pp.u0.amplitude = r.number("u0_amplitude", 0.0);
  pp.u0.mode = static_cast<int>(r.integer("u0_mode", 1));
  r.require(pp.u0.level > 0.0, "u0_level", "must be > 0");
  r.require(std::abs(pp.u0.amplitude) < pp.u0.level, "u0_amplitude",
            "needs |amplitude| < level for positive data");
  r.require(pp.u0.mode >= 1, "u0_mode", "must be >= 1");
  pp.t0 = r.number("t0", 0.0);
  pp.T = r.number("T", 1.0);
  pp.dt = r.number("dt", 1e-3);
  pp.store_every = r.integer("store_every", 1);
  pp.c_cfl = r.number("c_cfl", 0.2);
  r.require(pp.t0 >= 0.0, "t0", "must be >= 0");
  r.require(pp.T > pp.t0, "T", "needs T > t0, got T = " + fmt(pp.T) + ", t0 = " + fmt(pp.t0));
  r.require(pp.dt > 0.0, "dt", "must be > 0");
  r.require(pp.store_every >= 1, "store_every", "must be >= 1");
  r.require(pp.c_cfl > 0.0 && pp.c_cfl <= 0.25, "c_cfl", "must lie in (0, 0.25]");
  if (pp.T > pp.t0 && pp.dt > 0.0) {
    const double steps = (pp.T - pp.t0) / pp.dt;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps) || rounded < 1.0) {
      r.errors.push_back("[pme] dt: (T - t0)/dt = (" + fmt(pp.T) + " - " + fmt(pp.t0) + ")/" +
                         fmt(pp.dt) + " = " + fmt(steps) + " is not a positive integer");
    } else if (pp.store_every >= 1 &&
               static_cast<std::uint64_t>(rounded) % pp.store_every != 0) {
      r.errors.push_back("[pme] store_every = " + std::to_string(pp.store_every) +
                         " does not divide the " + fmt(rounded) + " outer steps");
    } else if (pp.store_every >= 1 && rounded / static_cast<double>(pp.store_every) < 2.0) {
      r.errors.push_back("[pme] store_every = " + std::to_string(pp.store_every) +
                         " leaves fewer than three stored states");
    }
  }

  // Checks.
  auto& cs = cfg.checks;
  cs.variants.clear();
  for (const auto& w : r.words("variants", {"Thm_1_1", "Thm_1_4", "Thm_b1_limit",
                                            "Thm_b1_bounded_grad"})) {
    if (auto v = harnack::parse_variant(w))
      cs.variants.push_back(*v);
    else
      r.errors.push_back("[checks] variants: '" + w +
                         "' is not one of Thm_1_1, Thm_1_4, Thm_b1_limit, Thm_b1_bounded_grad");
  }
  cs.b_values = r.numbers("b", {1.0, 1.5, 2.0, 3.0, 5.0});
  for (double b : cs.b_values) r.require(b >= 1.0, "b", "needs b >= 1, got " + fmt(b));
  cs.identities = r.words("identities", {});
  for (const auto& id : cs.identities)
    r.require(std::find(identity_ids().begin(), identity_ids().end(), id) != identity_ids().end(),
              "identities",
              "'" + id + "' is not one of prop21, prop22, quotient_rule, bochner, yz_decomposition");
  cs.lnvv_alpha = r.numbers("lnvv_alpha", {});
  for (double a : cs.lnvv_alpha) r.require(a > 1.0, "lnvv_alpha", "needs alpha > 1, got " + fmt(a));
  if (!cs.lnvv_alpha.empty())
    r.require(ms.kind == ManifoldKind::FlatTorus, "lnvv_alpha",
              "eq (1.5) with K = 0 applies to flat_torus only");
  cs.lyh = r.boolean("lyh", true);
  cs.barenblatt = r.boolean("barenblatt", false);
  cs.mass = r.boolean("mass", true);
  cs.closed_form = r.boolean("closed_form", true);
  cs.curves = r.integer("curves", 100);
  cs.seed = r.integer("seed", 20240601);
  cs.t_min_fraction = r.number("t_min_fraction", 0.05);
  r.require(cs.t_min_fraction > 0.0 && cs.t_min_fraction < 1.0, "t_min_fraction",
            "must lie in (0, 1)");

  // Tolerances.
  auto& tol = cfg.tol;
  const auto positive = [&](const char* key, double fallback) {
    const double x = r.number(key, fallback);
    r.require(x > 0.0, key, "must be > 0");
    return x;
  };
  tol.ineq = positive("tol_ineq", 1e-2);
  tol.path = positive("tol_path", 1e-6);
  tol.hyp = positive("tol_hyp", 1e-8);
  tol.mass = positive("tol_mass", 1e-6);
  tol.identity = positive("tol_identity", 1e-2);
  tol.closed_form = positive("tol_closed_form", 1e-6);
  cfg.output_dir = r.text("dir", "");

  // Extinction, with the arithmetic shown.
  if (kind_ok && ms.kind == ManifoldKind::RoundSphere && ms.n >= 2 && ms.r0_sq > 0.0 &&
      pp.T > pp.t0) {
    const double t_ext = pp.t0 + ms.r0_sq / (2.0 * (ms.n - 1));
    if (!(pp.T < t_ext))
      r.errors.push_back("[pme] T = " + fmt(pp.T) + " is not before extinction at t = t0 + " +
                         "r0_sq/(2(n-1)) = " + fmt(pp.t0) + " + " + fmt(ms.r0_sq) + "/(2*" +
                         std::to_string(ms.n - 1) + ") = " + fmt(t_ext));
  }
  if (kind_ok && ms.kind == ManifoldKind::RotSymSurface && ms.intervals >= 16 && r.errors.empty()) {
    try {
      const auto m = ms.build();
      const double area = geometry::integrate(ScalarField::constant(m.grid(), 1.0), m);
      const double t_ext = pp.t0 + area / (8.0 * std::numbers::pi);
      if (!(pp.T < t_ext))
        r.errors.push_back("[pme] T = " + fmt(pp.T) + " is not before extinction at t = t0 + " +
                           "Area/(8 pi) = " + fmt(pp.t0) + " + " + fmt(area) + "/" +
                           fmt(8.0 * std::numbers::pi) + " = " + fmt(t_ext));
    } catch (const std::exception& e) {
      r.errors.push_back(std::string("[manifold] profile: ") + e.what());
    }
  }

  result.errors.insert(result.errors.end(), r.errors.begin(), r.errors.end());
  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

ConfigResult load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    ConfigResult r;
    r.errors.push_back("cannot read config file '" + file.string() + "'");
    return r;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

ManifoldState ManifoldSpec::build(std::size_t refine_level) const {
  const std::size_t N = intervals << refine_level;
  switch (kind) {
    case ManifoldKind::FlatTorus:
      return ManifoldState::flat_torus(lengths, N);
    case ManifoldKind::RoundSphere:
      return ManifoldState::round_sphere(n, r0_sq, N);
    case ManifoldKind::RotSymSurface: {
      if (profile == "perturbed") return ManifoldState::rotsym_surface(profiles::perturbed(eps), N);
      if (profile == "dumbbell") return ManifoldState::rotsym_surface(profiles::dumbbell(eps), N);
      return ManifoldState::rotsym_surface(profiles::round, N);
    }
  }
  throw std::logic_error("unknown manifold kind");
}

}  // namespace rfpme::runner
