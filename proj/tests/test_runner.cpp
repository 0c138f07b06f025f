#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfpme/runner.hpp"

using namespace rfpme;
using namespace rfpme::runner;
using nlohmann::json;

namespace {

bool any_contains(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

std::string joined(const std::vector<std::string>& errors) {
  std::string out;
  for (const auto& e : errors) out += e + "\n";
  return out;
}

// Small, fast scenario used by the orchestration tests.
ScenarioConfig small_sphere_bump() {
  auto cfg = standard_suite()[3];  // sphere-bump
  cfg.manifold.intervals = 64;
  cfg.pme.T = 0.05;
  cfg.pme.dt = 1e-3;
  cfg.checks.curves = 20;
  return cfg;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, 2.0 / 7.0})
    CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("config parsing") {
  SUBCASE("minimal sphere config is valid") {
    const auto r = parse_config("kind = round_sphere\nn = 2\nr0_sq = 1\np = 2\nT = 0.2\ndt = 1e-4\n");
    REQUIRE_MESSAGE(r.ok(), joined(r.errors));
    CHECK(r.config->manifold.kind == ManifoldKind::RoundSphere);
    CHECK(r.config->manifold.n == 2);
    CHECK(r.config->pme.T == 0.2);
    CHECK(r.config->pme.dt == 1e-4);
  }
  SUBCASE("sections, comments and lists") {
    const auto r = parse_config(
        "; comment\n[scenario]\nname = demo\n[manifold]\nkind = flat_torus\nn = 1\n"
        "intervals = 64\n[pme]\nu0 = bump\nu0_amplitude = 0.5\nT = 0.1\ndt = 1e-3\n"
        "# another comment\n[checks]\nb = 1, 2 3\nlnvv_alpha = 1.5\nidentities = prop21 bochner\n"
        "variants = Thm_1_4\n[tolerances]\ntol_ineq = 0.05\n");
    REQUIRE_MESSAGE(r.ok(), joined(r.errors));
    const auto& c = *r.config;
    CHECK(c.name == "demo");
    CHECK(c.checks.b_values == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(c.checks.lnvv_alpha == std::vector<double>{1.5});
    CHECK(c.checks.identities == std::vector<std::string>{"prop21", "bochner"});
    CHECK(c.checks.variants == std::vector<harnack::Variant>{harnack::Variant::Thm_1_4});
    CHECK(c.tol.ineq == 0.05);
    CHECK(c.pme.u0.kind == pme::InitialData::Kind::Bump);
  }
  SUBCASE("T past extinction shows the arithmetic") {
    const auto r = parse_config("kind = round_sphere\nn = 2\nr0_sq = 1\nT = 0.6\ndt = 1e-2\n");
    REQUIRE_FALSE(r.ok());
    MESSAGE(joined(r.errors));
    CHECK(any_contains(r.errors, "extinction at t = t0 + r0_sq/(2(n-1)) = 0 + 1/(2*1) = 0.5"));
  }
  SUBCASE("unknown key is rejected with a suggestion") {
    const auto r = parse_config("kind = flat_torus\nalpha = 1.5\n");
    REQUIRE_FALSE(r.ok());
    MESSAGE(joined(r.errors));
    CHECK(any_contains(r.errors, "unknown key 'alpha'"));
    CHECK(any_contains(r.errors, "did you mean 'lnvv_alpha' in [checks]?"));
  }
  SUBCASE("every error is reported, not just the first") {
    const auto r = parse_config(
        "[manifold]\nkind = round_sphere\nn = 2\nintervals = 4\n[pme]\np = 0.5\nbogus = 1\n"
        "T = 0.3\ndt = 0.07\n[checks]\nb = 0.5\n");
    REQUIRE_FALSE(r.ok());
    MESSAGE(joined(r.errors));
    CHECK(r.errors.size() >= 4);
    CHECK(any_contains(r.errors, "bogus"));
    CHECK(any_contains(r.errors, "intervals"));
    CHECK(any_contains(r.errors, "p"));
    CHECK(any_contains(r.errors, "(T - t0)/dt"));
  }
  SUBCASE("key in the wrong section and duplicate keys") {
    const auto wrong = parse_config("[pme]\nkind = flat_torus\n");
    CHECK(any_contains(wrong.errors, "belongs in [manifold]"));
    const auto twice = parse_config("[pme]\np = 2\np = 3\n");
    CHECK_FALSE(twice.ok());
  }
  SUBCASE("lnvv_alpha is torus-only") {
    const auto r = parse_config("kind = round_sphere\nn = 2\nT = 0.2\ndt = 1e-3\nlnvv_alpha = 1.5\n");
    CHECK_FALSE(r.ok());
  }
  SUBCASE("missing file") {
    const auto r = load_config("/nonexistent/config.ini");
    CHECK_FALSE(r.ok());
    CHECK(any_contains(r.errors, "cannot read"));
  }
  SUBCASE("help lists every key") {
    const auto help = config_help();
    for (const char* key : {"kind", "r0_sq", "store_every", "lnvv_alpha", "tol_identity", "seed"})
      CHECK(help.find(key) != std::string::npos);
  }
}

TEST_CASE("run_scenario") {
  SUBCASE("small sphere bump passes every check") {
    const auto s = run_scenario(small_sphere_bump());
    CHECK(s.status == RunStatus::Pass);
    CHECK(s.exit_code() == kPass);
    CHECK(s.hypotheses.valid());
    CHECK(s.series.size() == s.stored_states);
    CHECK_FALSE(s.checks.empty());
    for (const auto& c : s.checks) CHECK_MESSAGE(c.status != harnack::CheckStatus::Fail, c.id);
  }
  SUBCASE("b = 2: Theorem 1.4 and Theorem 1.1 agree") {
    const auto s = run_scenario(small_sphere_bump());
    const auto find = [&](const std::string& id) {
      return std::find_if(s.checks.begin(), s.checks.end(),
                          [&](const CheckResult& c) { return c.id == id; });
    };
    REQUIRE(find("Thm_1_1_b2") != s.checks.end());
    REQUIRE(find("Thm_1_4_b2") != s.checks.end());
    CHECK(std::abs(find("Thm_1_1_b2")->value - find("Thm_1_4_b2")->value) <= 1e-12);
  }
  SUBCASE("empty check list gives trajectory stats only") {
    auto cfg = small_sphere_bump();
    cfg.checks = CheckSpec{};
    cfg.checks.variants.clear();
    cfg.checks.b_values.clear();
    cfg.checks.lyh = cfg.checks.mass = cfg.checks.closed_form = false;
    cfg.checks.curves = 0;
    const auto s = run_scenario(cfg);
    CHECK(s.status == RunStatus::Pass);
    CHECK(s.checks.empty());
    CHECK(s.stats.outer_steps == 50);
    CHECK(s.series.size() == s.stored_states);
    CHECK(to_csv(s).substr(0, to_csv(s).find('\n')) == "t,mass,R_max_t,u_min,u_max,v_min,v_max");
  }
  SUBCASE("dumbbell is gated") {
    auto cfg = dumbbell_scenario();
    cfg.manifold.intervals = 64;
    cfg.checks.curves = 5;
    const auto s = run_scenario(cfg);
    CHECK_FALSE(s.hypotheses.curvature_nonneg);
    CHECK(s.status == RunStatus::HypothesisInvalid);
    CHECK(s.exit_code() == kHypothesisInvalid);
    for (const auto& c : s.checks)
      if (c.kind == "margin" || c.kind == "path")
        CHECK(c.status == harnack::CheckStatus::Skipped);
  }
  SUBCASE("numerical failures become an error status, not an exception") {
    auto cfg = small_sphere_bump();
    cfg.pme.c_cfl = 10.0;  // unvalidated: bypasses the config parser
    cfg.pme.dt = 0.05;
    cfg.pme.T = 0.1;
    RunSummary s;
    CHECK_NOTHROW(s = run_scenario(cfg));
    if (s.status == RunStatus::Error) {
      CHECK(s.exit_code() == kCheckFailed);
      CHECK(s.error.find("sphere-bump") != std::string::npos);
    }
  }
  SUBCASE("refinement adds levels and orders") {
    auto cfg = small_sphere_bump();
    cfg.manifold.intervals = 32;
    cfg.checks.identities = {"prop21"};
    cfg.checks.b_values = {2.0};
    cfg.checks.curves = 0;
    const auto s = run_scenario(cfg, RunOptions{2, 1});
    for (const auto& c : s.checks) {
      CHECK(c.refinement.size() == 2);
      if (c.kind == "identity") {
        REQUIRE(c.measured_order.has_value());
        MESSAGE(c.id << " order " << *c.measured_order);
        CHECK(*c.measured_order >= 1.8);
      }
    }
  }
}

TEST_CASE("batch exit code precedence") {
  RunSummary pass, fail, invalid;
  fail.status = RunStatus::Fail;
  invalid.status = RunStatus::HypothesisInvalid;
  CHECK(batch_exit_code({pass, pass}) == kPass);
  CHECK(batch_exit_code({pass, invalid}) == kHypothesisInvalid);
  CHECK(batch_exit_code({invalid, fail, pass}) == kCheckFailed);
  CHECK(batch_exit_code({}) == kPass);
}

TEST_CASE("reports") {
  const auto s = run_scenario(small_sphere_bump());
  SUBCASE("JSON round-trips and is versioned") {
    const auto text = to_json(s);
    const auto j = json::parse(text);
    CHECK(j.at("schema_version") == kSchemaVersion);
    CHECK(j.at("code_version") == kCodeVersion);
    CHECK(j.at("checks").size() == s.checks.size());
    CHECK(j.dump(2) + "\n" == text);
    CHECK(j.contains("wall_clock_seconds"));
    CHECK_FALSE(json::parse(to_json(s, false)).contains("wall_clock_seconds"));
  }
  SUBCASE("CSV header, LF endings, round-trip doubles") {
    const auto csv = to_csv(s);
    CHECK(csv.find('\r') == std::string::npos);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "t,mass,R_max_t,u_min,u_max,v_min,v_max,worst_F_margin_b1,worst_F_margin_b1.5,"
          "worst_F_margin_b2,worst_F_margin_b3,worst_F_margin_b5");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      std::istringstream fields(line);
      std::string cell;
      std::getline(fields, cell, ',');
      CHECK(std::stod(cell) == s.series.at(row).t);
      std::getline(fields, cell, ',');
      CHECK(std::stod(cell) == s.series.at(row).mass);
      ++row;
    }
    CHECK(row == s.series.size());
  }
  SUBCASE("sphere-homogeneous CSV has increasing R") {
    auto cfg = standard_suite()[2];
    cfg.manifold.intervals = 64;
    cfg.checks = CheckSpec{};
    cfg.checks.curves = 0;
    const auto h = run_scenario(cfg);
    for (std::size_t j = 1; j < h.series.size(); ++j)
      CHECK(h.series[j].r_max > h.series[j - 1].r_max);
  }
  SUBCASE("emit_report writes the three files") {
    const auto dir = std::filesystem::temp_directory_path() / "rfpme_test_report";
    std::filesystem::remove_all(dir);
    emit_report(s, dir);
    CHECK(read_file(dir / "series.csv") == to_csv(s));
    CHECK(read_file(dir / "margins.txt") == margin_table(s));
    CHECK(json::parse(read_file(dir / "summary.json")).at("scenario") == "sphere-bump");
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("determinism across thread counts") {
  auto a = small_sphere_bump();
  auto b = standard_suite()[0];
  b.manifold.intervals = 64;
  b.checks.curves = 20;
  const auto one = run_batch({a, b}, 1);
  const auto many = run_batch({a, b}, 2);
  const auto inner = run_scenario(a, RunOptions{4, 0});
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(to_json(one[i], false) == to_json(many[i], false));
    CHECK(to_csv(one[i]) == to_csv(many[i]));
  }
  CHECK(to_json(one[0], false) == to_json(inner, false));
}
