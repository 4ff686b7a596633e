#pragma once

/// @file cli.hpp
/// @brief Subcommand implementations behind the `faultbench` executable.
///
/// Exit codes: 0 OK / Nominal, 1 semantic violations, 2 configuration or
/// parse error, 3 Error run, 4 Failure run, 5 numerical divergence.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace faultbench {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,
  kExitConfig = 2,
  kExitError = 3,
  kExitFailure = 4,
  kExitDivergence = 5,
};

struct GlobalOptions {
  /// Overrides the scenario seed.
  std::optional<std::uint64_t> seed;
  std::filesystem::path out{"."};
  bool quiet{false};
};

struct SweepOptions {
  /// "fine" or "coarse"; ignored when durations is non-empty.
  std::string preset{"fine"};
  std::vector<double> durations;
  std::size_t seeds{20};
  unsigned jobs{1};
};

/// FAULTBENCH_JOBS when set to a positive integer, else 1.
unsigned default_jobs();

int cmd_validate(const std::filesystem::path& path, const GlobalOptions& global, std::ostream& out,
                 std::ostream& err);

/// Writes trace.csv and violations.csv under global.out.
int cmd_run(const std::filesystem::path& path, const GlobalOptions& global, bool disable_faults, std::ostream& out,
            std::ostream& err);

/// Writes sweep_results.csv, sweep_summary.json and rmse_plot.svg under
/// global.out.
int cmd_sweep(const std::filesystem::path& path, const GlobalOptions& global, const SweepOptions& options,
              std::ostream& out, std::ostream& err);

}  // namespace faultbench
