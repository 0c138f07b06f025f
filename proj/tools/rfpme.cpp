// Command line front end: run <config> | suite | check-constants n p b.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "rfpme/harnack.hpp"
#include "rfpme/runner.hpp"

namespace fs = std::filesystem;
using namespace rfpme;
using namespace rfpme::runner;

namespace {

void print_summary(const RunSummary& s, const fs::path& dir) {
  std::cout << margin_table(s);
  if (!s.error.empty()) std::cerr << "error: " << s.error << "\n";
  std::cout << "report written to " << dir.string() << "\n\n";
}

int emit_all(const std::vector<RunSummary>& summaries, const fs::path& out) {
  for (const auto& s : summaries) {
    const auto dir = out / s.scenario;
    try {
      emit_report(s, dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kCheckFailed;
    }
    print_summary(s, dir);
  }
  return batch_exit_code(summaries);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ricci flow coupled with the porous medium equation: Harnack estimate checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kCodeVersion);
  app.footer("Exit codes: 0 all checks pass, 2 a check failed, 3 hypotheses invalid, "
             "4 config error.");

  std::string config_file;
  std::string out_dir;
  std::size_t threads = 1;
  std::size_t refine = 0;

  auto* run = app.add_subcommand("run", "Run one scenario described by a config file");
  run->add_option("config-file", config_file, "Scenario config (INI-style key = value)")
      ->required();
  run->add_option("--out", out_dir, "Output directory (default: [output] dir or out/<name>)");
  run->add_option("--threads", threads, "Worker threads for the post-hoc checks")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  run->add_option("--refine", refine,
                  "Re-run at (h/2^k, dt/4^k) for k = 1..K and report order estimates")
      ->check(CLI::Range(std::size_t{0}, std::size_t{4}));
  run->footer("\nConfig keys:\n" + config_help());

  auto* suite = app.add_subcommand("suite", "Run the built-in standard suite (six scenarios)");
  suite->add_option("--out", out_dir, "Output directory (default: out)");
  suite->add_option("--threads", threads, "Scenarios run concurrently")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  suite->add_option("--refine", refine, "Refinement levels, as for run")
      ->check(CLI::Range(std::size_t{0}, std::size_t{4}));

  int n = 0;
  double p = 0.0, b = 0.0;
  auto* constants = app.add_subcommand("check-constants", "Print the Harnack constants");
  constants->add_option("n", n, "Dimension")->required()->check(CLI::PositiveNumber);
  constants->add_option("p", p, "PME exponent, p > 1")->required();
  constants->add_option("b", b, "Harnack parameter, b > 0")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*run) {
    const auto parsed = load_config(config_file);
    if (!parsed.ok()) {
      std::cerr << config_file << ": " << parsed.errors.size() << " config error(s)\n";
      for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
      return kConfigError;
    }
    const auto& cfg = *parsed.config;
    fs::path dir = !out_dir.empty()             ? fs::path(out_dir)
                   : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                             : fs::path("out") / cfg.name;
    const auto summary = run_scenario(cfg, RunOptions{threads, refine});
    try {
      emit_report(summary, dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kCheckFailed;
    }
    print_summary(summary, dir);
    return summary.exit_code();
  }

  if (*suite) {
    const auto summaries = run_batch(standard_suite(), threads, refine);
    return emit_all(summaries, out_dir.empty() ? fs::path("out") : fs::path(out_dir));
  }

  if (*constants) {
    std::cout << "n = " << n << ", p = " << format_double(p) << ", b = " << format_double(b)
              << "\n";
    bool any = false;
    for (auto v : {harnack::Variant::Thm_1_4, harnack::Variant::Thm_1_1,
                   harnack::Variant::Thm_b1_limit, harnack::Variant::Thm_b1_bounded_grad}) {
      try {
        const auto k = harnack::constants(n, p, b, v);
        std::cout << "  " << harnack::to_string(v) << ": b = " << format_double(k.b)
                  << "  alpha = " << format_double(k.alpha) << "  d = " << format_double(k.d)
                  << "  C0 = " << format_double(k.c0) << "  kappa = " << format_double(k.kappa)
                  << "\n";
        any = true;
      } catch (const std::invalid_argument& e) {
        std::cout << "  " << harnack::to_string(v) << ": not applicable (" << e.what() << ")\n";
      }
    }
    return any ? kPass : kConfigError;
  }
  return kConfigError;
}
