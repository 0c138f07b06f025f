#pragma once

// Scenario configuration, orchestration and report persistence: the only
// module that performs I/O.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfpme/field.hpp"
#include "rfpme/harnack.hpp"
#include "rfpme/manifold.hpp"
#include "rfpme/pme.hpp"
#include "rfpme/ricci_flow.hpp"

namespace rfpme::runner {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Exit-code contract of the command line.
enum ExitCode : int { kPass = 0, kCheckFailed = 2, kHypothesisInvalid = 3, kConfigError = 4 };

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int n = 1;
  double r0_sq = 1.0;                 // round_sphere
  std::vector<double> lengths;        // flat_torus (defaults to 2 pi per side)
  std::string profile = "round";      // rotsym_surface: round | perturbed | dumbbell
  double eps = 0.0;                   // profile parameter
  std::size_t intervals = 256;

  ManifoldState build(std::size_t refine_level = 0) const;
};

struct CheckSpec {
  std::vector<harnack::Variant> variants{harnack::Variant::Thm_1_1, harnack::Variant::Thm_1_4};
  std::vector<double> b_values{1.0, 1.5, 2.0, 3.0, 5.0};
  std::vector<std::string> identities;  // prop21 prop22 quotient_rule bochner yz_decomposition
  std::vector<double> lnvv_alpha;       // flat torus only
  bool lyh = true;
  bool barenblatt = false;
  bool mass = true;
  bool closed_form = true;  // constant data on the torus or the round sphere
  std::size_t curves = 100;
  std::uint64_t seed = 20240601;
  double t_min_fraction = 0.05;  // t_min = fraction * (T - t0)
};

struct Tolerances {
  double ineq = 1e-2;
  double path = 1e-6;
  double hyp = 1e-8;
  double mass = 1e-6;
  double identity = 1e-2;
  double closed_form = 1e-6;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ManifoldSpec manifold;
  pme::PmeParams pme;
  CheckSpec checks;
  Tolerances tol;
  std::string output_dir;  // empty: the caller decides
};

struct ConfigResult {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;  // every validation error, not just the first
  bool ok() const noexcept { return config.has_value(); }
};

/// Parses and validates the INI-style config grammar (see config_help()).
ConfigResult parse_config(std::string_view text);
ConfigResult load_config(const std::filesystem::path& file);

/// Every accepted key with its section, default and meaning.
std::string config_help();

/// Known identity ids accepted in checks.identities.
const std::vector<std::string>& identity_ids();

/// One line of the report: a margin, identity residual or audit.
struct CheckResult {
  std::string id;
  std::string kind;  // margin | path | identity | audit | diagnostic
  harnack::CheckStatus status = harnack::CheckStatus::Pass;
  double value = 0.0;  // worst margin or residual
  double tolerance = 0.0;
  std::size_t node = 0;
  double time = 0.0;
  std::string note;
  /// Values at each refinement level (level 0 first) under --refine.
  std::vector<double> refinement;
  std::optional<double> measured_order;
};

/// One CSV row per stored state.
struct SeriesRow {
  double t = 0.0;
  double mass = 0.0;
  double r_max = 0.0;
  double u_min = 0.0, u_max = 0.0;
  double v_min = 0.0, v_max = 0.0;
  std::vector<double> margins;  // worst Theorem 1.4 margin per b in b_columns
};

enum class RunStatus { Pass, Fail, HypothesisInvalid, Error };
std::string to_string(RunStatus s);

struct RunSummary {
  std::string scenario;
  ScenarioConfig config;
  RunStatus status = RunStatus::Pass;
  std::string error;  // for RunStatus::Error
  ricci_flow::FlowHypothesisReport hypotheses;
  pme::RunStats stats;
  std::size_t stored_states = 0;
  std::size_t refine_levels = 0;
  std::vector<double> b_columns;
  std::vector<SeriesRow> series;
  std::vector<CheckResult> checks;
  double wall_clock_seconds = 0.0;

  int exit_code() const noexcept;
};

struct RunOptions {
  std::size_t threads = 1;  // post-hoc checks of one scenario run concurrently
  std::size_t refine = 0;   // extra levels at (h/2^k, dt/4^k)
};

/// Builds the manifold, runs the coupled flow and every requested check.
/// Never throws for numerical failures: they become RunStatus::Error.
RunSummary run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// The six standard scenarios, all expected to pass.
std::vector<ScenarioConfig> standard_suite();
/// The gating scenario: dumbbell surface with negative curvature (exit 3).
ScenarioConfig dumbbell_scenario();

/// Runs scenarios concurrently on `threads` workers; results keep input
/// order. Each scenario's checks run sequentially in this mode.
std::vector<RunSummary> run_batch(const std::vector<ScenarioConfig>& configs,
                                  std::size_t threads, std::size_t refine = 0);

/// Combined exit code: config error > check failed > hypothesis invalid > pass.
int batch_exit_code(const std::vector<RunSummary>& summaries);

/// Serializations. JSON keys are sorted; doubles are shortest round-trip.
std::string to_json(const RunSummary& s, bool include_wall_clock = true);
std::string to_csv(const RunSummary& s);
std::string margin_table(const RunSummary& s);

/// Writes summary.json, series.csv and margins.txt into dir (created).
void emit_report(const RunSummary& s, const std::filesystem::path& dir);

/// Shortest round-trip decimal form of x ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double x);

}  // namespace rfpme::runner
