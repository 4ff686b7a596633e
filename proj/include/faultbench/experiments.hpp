#pragma once

/// @file experiments.hpp
/// @brief Fault-duration sweeps: paired reference/faulty runs, RMSE damage
/// metrics, Nominal/Error/Failure classification and trend fitting.

#include "faultbench/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace faultbench {

class LengthMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateFit : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A sweep cell that could not be simulated.
class SweepCellError : public SimError {
public:
  SweepCellError(double duration, std::uint64_t seed, const std::string& what, bool diverged = false);
  double duration() const { return duration_; }
  std::uint64_t seed() const { return seed_; }
  /// True when the cause was a NumericalDivergence.
  bool diverged() const { return diverged_; }

private:
  double duration_;
  std::uint64_t seed_;
  bool diverged_;
};

enum class RunClass { Nominal, Error, Failure };

const char* run_class_name(RunClass value);
RunClass parse_run_class(const std::string& text);

/// Failure if any AngleFailure, else Error if any torque/speed record.
RunClass classify_run(std::span<const ViolationRecord> violations);

/// Root mean square of (faulty - reference). Throws LengthMismatch.
double rmse(std::span<const double> faulty, std::span<const double> reference);

struct QuadraticFit {
  double a{0.0};
  double b{0.0};
  double c{0.0};
  /// RMS of the fit error over the input points.
  double residual{0.0};

  double operator()(double x) const { return (a * x + b) * x + c; }
};

/// Least-squares a*x^2 + b*x + c. Throws DegenerateFit with fewer than
/// three distinct x values.
QuadraticFit fit_quadratic(std::span<const std::pair<double, double>> points);

// Single runs -------------------------------------------------------------

struct RunOutcome {
  TraceLog trace;
  std::vector<ViolationRecord> violations;
  RunClass classification{RunClass::Nominal};
  /// Activation log per injector, in declaration order.
  std::vector<std::vector<Activation>> activations;
};

/// Builds and runs the scenario once. Throws NumericalDivergence.
RunOutcome run_scenario(const ScenarioConfig& config, std::uint64_t seed, bool disable_faults = false);

/// Smallest gap (seconds of clean output) between successive fault windows;
/// nullopt with fewer than two windows.
std::optional<double> min_activation_gap(std::span<const Activation> activations, double dt);

// Sweeps ------------------------------------------------------------------

/// 0.05 .. 0.5 s in 0.05 s steps.
std::vector<double> fine_durations();
/// 0.5 .. 3.0 s in 0.25 s steps.
std::vector<double> coarse_durations();

/// Seed of the i-th replicate; identical for every duration so that cells
/// share random numbers across the sweep.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t index);

struct SweepPlan {
  std::vector<double> durations;
  std::size_t seeds_per_duration{20};
  ScenarioConfig scenario;
  std::vector<std::string> varied_injectors;
  std::string rmse_joint;
  double consecutive_gap_s{0.5};
  std::uint64_t base_seed{1};
  unsigned jobs{1};
};

/// Resolves the scenario's sweep defaults and checks the plan. Throws
/// std::invalid_argument for an unusable plan.
SweepPlan make_sweep_plan(ScenarioConfig scenario, std::vector<double> durations, std::size_t seeds,
                          std::uint64_t base_seed, unsigned jobs);

struct CellResult {
  double duration{0.0};
  std::size_t replicate{0};
  std::uint64_t seed{0};
  double rmse_position{0.0};
  double rmse_velocity{0.0};
  double rmse_torque{0.0};
  RunClass classification{RunClass::Nominal};
  std::size_t activations{0};
  /// Negative when the run had fewer than two fault windows.
  double min_gap_s{-1.0};

  bool operator==(const CellResult&) const = default;
};

struct MetricStats {
  double mean{0.0};
  double min{0.0};
  double max{0.0};
};

struct DurationSummary {
  double duration{0.0};
  std::size_t runs{0};
  MetricStats position;
  MetricStats velocity;
  MetricStats torque;
  double nominal_fraction{0.0};
  double error_fraction{0.0};
  double failure_fraction{0.0};
  std::size_t consecutive_runs{0};
  std::size_t isolated_runs{0};
  /// NaN when the bin is empty at this duration.
  double consecutive_failure_fraction{0.0};
  double isolated_failure_fraction{0.0};
};

struct SweepResult {
  std::vector<CellResult> cells;
  std::vector<DurationSummary> summary;
  std::optional<QuadraticFit> fit_position;
  std::optional<QuadraticFit> fit_velocity;
  std::optional<QuadraticFit> fit_torque;
  /// Duration where the Failure fraction first reaches 50 %.
  std::optional<double> d_star;
  std::optional<double> d_star_consecutive;
  std::optional<double> d_star_isolated;
  /// Largest duration up to which every duration keeps >= 90 % non-Failure.
  std::optional<double> d_safe;
  std::size_t seeds_per_duration{0};
  std::uint64_t base_seed{0};
  double consecutive_gap_s{0.0};
  std::string rmse_joint;
};

/// First crossing of `level` by a failure-fraction curve, linearly
/// interpolated between sweep points. NaN fractions are skipped. Returns
/// durations.front() when the first point already reaches the level.
std::optional<double> failure_threshold(std::span<const double> durations, std::span<const double> fractions,
                                        double level = 0.5);

/// Runs every (duration, replicate) cell on plan.jobs threads. Results do
/// not depend on the thread count. Throws SweepCellError.
SweepResult run_sweep(const SweepPlan& plan);

/// Aggregates, fits and thresholds from the per-cell results.
SweepResult summarize_sweep(std::vector<CellResult> cells, std::size_t seeds_per_duration, std::uint64_t base_seed,
                            double consecutive_gap_s, std::string rmse_joint);

void write_results_csv(std::ostream& os, std::span<const CellResult> cells);
std::vector<CellResult> read_results_csv(std::istream& is);

void write_summary_json(std::ostream& os, const SweepResult& result);
/// Reads aggregates, fits and thresholds back (cells are left empty).
SweepResult read_summary_json(std::istream& is);

/// Mean position RMSE per duration with min/max whiskers and the fitted
/// quadratic. Pure function of its input.
std::string render_rmse_svg(const SweepResult& result, const std::string& title);

void write_violations_csv(std::ostream& os, std::span<const ViolationRecord> violations);
std::vector<ViolationRecord> read_violations_csv(std::istream& is);

}  // namespace faultbench
