#include "faultbench/cli.hpp"

#include "faultbench/experiments.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>

namespace faultbench {

namespace {

int exit_code(RunClass value) {
  switch (value) {
    case RunClass::Nominal:
      return kExitOk;
    case RunClass::Error:
      return kExitError;
    case RunClass::Failure:
      return kExitFailure;
  }
  return kExitError;
}

/// Loads and validates; returns an exit code on failure.
std::optional<int> load_checked(const std::filesystem::path& path, ScenarioConfig& config, std::ostream& err) {
  try {
    config = load_scenario(path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto issues = validate_scenario(config);
  if (!issues.empty()) {
    for (const auto& issue : issues) err << path.string() << ": " << issue << '\n';
    return kExitInvalid;
  }
  return std::nullopt;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& file) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
  return os;
}

}  // namespace

unsigned default_jobs() {
  if (const char* env = std::getenv("FAULTBENCH_JOBS")) {
    char* end = nullptr;
    const auto value = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  return 1;
}

int cmd_validate(const std::filesystem::path& path, const GlobalOptions& global, std::ostream& out,
                 std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load_scenario(path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto issues = validate_scenario(config);
  for (const auto& issue : issues) out << path.string() << ": " << issue << '\n';
  if (!issues.empty()) return kExitInvalid;
  if (!global.quiet) out << "OK\n";
  return kExitOk;
}

int cmd_run(const std::filesystem::path& path, const GlobalOptions& global, bool disable_faults, std::ostream& out,
            std::ostream& err) {
  ScenarioConfig config;
  if (auto code = load_checked(path, config, err)) return *code;
  const auto seed = global.seed.value_or(config.seed);

  RunOutcome outcome;
  try {
    outcome = run_scenario(config, seed, disable_faults);
  } catch (const NumericalDivergence& e) {
    err << "numerical divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const SimError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    auto trace = open_output(global.out, "trace.csv");
    outcome.trace.write_csv(trace);
    auto violations = open_output(global.out, "violations.csv");
    write_violations_csv(violations, outcome.violations);
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  if (!global.quiet) {
    out << "seed: " << seed << '\n';
    out << "violations: " << outcome.violations.size() << '\n';
    for (std::size_t i = 0; i < config.injectors.size(); ++i) {
      out << "activations " << config.injectors[i].name << ": " << outcome.activations[i].size() << '\n';
    }
  }
  out << "classification: " << run_class_name(outcome.classification) << '\n';
  return exit_code(outcome.classification);
}

int cmd_sweep(const std::filesystem::path& path, const GlobalOptions& global, const SweepOptions& options,
              std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  if (auto code = load_checked(path, config, err)) return *code;

  std::vector<double> durations = options.durations;
  if (durations.empty()) {
    if (options.preset == "fine") {
      durations = fine_durations();
    } else if (options.preset == "coarse") {
      durations = coarse_durations();
    } else {
      err << "config error: unknown preset '" << options.preset << "' (expected fine or coarse)\n";
      return kExitConfig;
    }
  }

  SweepResult result;
  try {
    const auto plan =
        make_sweep_plan(config, durations, options.seeds, global.seed.value_or(config.seed), options.jobs);
    result = run_sweep(plan);
  } catch (const SweepCellError& e) {
    err << (e.diverged() ? "numerical divergence in " : "error in ") << e.what() << '\n';
    return e.diverged() ? kExitDivergence : kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    auto csv = open_output(global.out, "sweep_results.csv");
    write_results_csv(csv, result.cells);
    auto json = open_output(global.out, "sweep_summary.json");
    write_summary_json(json, result);
    auto svg = open_output(global.out, "rmse_plot.svg");
    svg << render_rmse_svg(result, "Fault duration vs. " + result.rmse_joint + " position RMSE");
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  if (!global.quiet) {
    out << "cells: " << result.cells.size() << " (" << result.summary.size() << " durations x "
        << result.seeds_per_duration << " seeds)\n";
    out << "duration_s  rmse_pos_mean  failure_fraction\n";
    for (const auto& s : result.summary) {
      out << format_number(s.duration) << "  " << format_number(s.position.mean) << "  "
          << format_number(s.failure_fraction) << '\n';
    }
    auto show = [&](const char* label, const std::optional<double>& value) {
      out << label << ": " << (value ? format_number(*value) : std::string("none")) << '\n';
    };
    show("d_star_s", result.d_star);
    show("d_star_consecutive_s", result.d_star_consecutive);
    show("d_star_isolated_s", result.d_star_isolated);
    show("d_safe_s", result.d_safe);
  }
  return kExitOk;
}

}  // namespace faultbench
