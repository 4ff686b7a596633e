// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "faultbench/cli.hpp"
#include "faultbench/dmp.hpp"
#include "faultbench/experiments.hpp"
#include "faultbench/faults.hpp"
#include "faultbench/plant.hpp"
#include "faultbench/scenario.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace faultbench;
namespace fs = std::filesystem;

namespace {

const std::string kData = FAULTBENCH_DATA_DIR;
int failures = 0;

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void verdict(int id, bool pass, const std::string& what) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

void note(const char* fmt, auto... args) {
  std::printf("  ");
  if constexpr (sizeof...(args) == 0) {
    std::fputs(fmt, stdout);
  } else {
    std::printf(fmt, args...);
  }
  std::printf("\n");
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : "undefined"; }

int shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1 ----------------------------------------------------------------------

void fault_suite() {
  Stopwatch clock;
  const int code = shell(std::string(FAULTBENCH_FAULTS_SUITE) + " > /dev/null 2>&1");
  const double t = clock.seconds();
  note("fault-model suite exit code %d, %.2f s", code, t);
  verdict(1, code == 0 && t < 10.0, "fault-model invariants hold as exact assertions, runtime < 10 s");
}

// 2 ----------------------------------------------------------------------

void stochastic() {
  Stopwatch clock;
  const double dt = 1e-3;
  Rng rng(2024);

  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_activation_time({1.0, 0.1}, 0.0, dt, rng);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  note("MTTF(1.0, 0.1): mean %.6f, sd %.6f over %d samples", mean, sd, n);

  // A one-step window re-arms immediately, so every armed step is a Bernoulli trial.
  const double p = 0.0005;
  const FaultSpec spec{"p", "x.y", Bias{1.0}, FailureProbability{p}, ConstantTime{dt}};
  auto state = initial_state(spec, dt);
  long long armed = 0, fired = 0;
  for (long long k = 0; armed < 10'000'000; ++k) {
    const bool was_armed = state.phase == InjectorPhase::Armed;
    const auto out = injector_step(spec, state, 0.0, static_cast<double>(k) * dt, dt, false, rng);
    if (was_armed) {
      ++armed;
      fired += out.trigger_out ? 1 : 0;
    }
  }
  const double rate = static_cast<double>(fired) / static_cast<double>(armed);
  const double expected = p * static_cast<double>(armed);
  const double diff2 = std::pow(static_cast<double>(fired) - expected, 2);
  const double chi2 = diff2 / expected + diff2 / (static_cast<double>(armed) - expected);
  note("FailureProbability(0.0005): %lld activations in %lld armed steps, rate %.7f, chi2 %.3f", fired, armed,
       rate, chi2);
  const double t = clock.seconds();
  note("runtime %.2f s", t);
  const bool pass = std::abs(mean - 1.0) < 0.002 && std::abs(sd - 0.1) < 0.01 && std::abs(rate - p) < 0.1 * p &&
                    chi2 < 6.635 && t < 60.0;
  verdict(2, pass, "MTTF moments and per-step activation rate are sound, runtime < 60 s");
}

// 3 ----------------------------------------------------------------------

void dmp_attractor() {
  Stopwatch clock;
  const double dt = 1e-3;
  double worst_error = 0.0;
  int worst_crossings = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      for (const double tau : {0.5, 1.0, 2.0}) {
        DmpParams p;
        p.tau = tau;
        p.start = -1.0 + 0.5 * i;
        p.goal = -0.8 + 0.45 * j;
        p.basis = make_basis(50, p.alpha_s);
        // 40 time constants of the critically damped spring.
        const auto steps = static_cast<std::size_t>(std::ceil(40.0 * tau / p.alpha_z / dt));
        DmpState state{p.start, 0.0};
        int crossings = 0;
        double side = p.start - p.goal;
        for (std::size_t k = 0; k < steps; ++k) {
          dmp_step(p, state, 1.0, dt);
          const double now = state.y - p.goal;
          if (side != 0.0 && now != 0.0 && (now > 0) != (side > 0)) ++crossings;
          if (now != 0.0) side = now;
        }
        worst_error = std::max(worst_error, std::abs(state.y - p.goal));
        worst_crossings = std::max(worst_crossings, crossings);
      }
    }
  }
  note("unforced 5x5x3 grid: worst |y(T) - g| %.3g rad, worst goal crossings %d", worst_error, worst_crossings);

  const auto config = load_scenario(kData + "/case_study.json");
  const auto& demo = *config.demo;
  const auto steps = static_cast<std::size_t>(std::llround(demo.duration() / dt)) + 1;
  double worst_ratio = 0.0;
  for (const auto& name : demo.joints) {
    const auto y = demo.joint(name);
    DmpParams p;
    p.tau = demo.duration();
    p.alpha_z = config.dmp.alpha_z;
    p.beta_z = config.dmp.beta_z.value_or(p.alpha_z / 4.0);
    p.alpha_s = config.dmp.alpha_s;
    p.basis = make_basis(config.dmp.n_basis, p.alpha_s, config.dmp.basis_width);
    if (learn_weights(y, demo.dt(), p) != LearnStatus::Ok) worst_ratio = 1.0;
    const auto out = replay(p, dt, steps);
    double sum = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double x = static_cast<double>(k) * dt / demo.dt();
      const auto i = std::min(static_cast<std::size_t>(x), y.size() - 2);
      const double f = x - static_cast<double>(i);
      const double target = y[i] * (1 - f) + y[i + 1] * f;
      sum += (out[k] - target) * (out[k] - target);
    }
    const double err = std::sqrt(sum / static_cast<double>(steps));
    const double amplitude = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
    note("demo %-7s replay rmse %.5f rad = %.3f%% of amplitude %.3f rad", name.c_str(), err, 100 * err / amplitude,
         amplitude);
    worst_ratio = std::max(worst_ratio, err / amplitude);
  }
  const double t = clock.seconds();
  note("runtime %.2f s", t);
  verdict(3, worst_error < 1e-3 && worst_crossings <= 1 && worst_ratio < 0.01 && t < 30.0,
          "DMP converges without ringing and replays the demo within 1% of amplitude, runtime < 30 s");
}

// 4 ----------------------------------------------------------------------

void baseline() {
  auto config = load_scenario(kData + "/case_study.json");
  config.monitored.clear();
  for (const auto& j : config.joints) {
    config.monitored.push_back("plant.theta_" + j.name);
    config.monitored.push_back("controller.y_ref_" + j.name);
  }
  Stopwatch clock;
  const auto outcome = run_scenario(config, config.seed, true);
  const double t = clock.seconds();
  double worst = 0.0;
  for (const auto& j : config.joints) {
    const double err =
        rmse(outcome.trace.column("plant.theta_" + j.name), outcome.trace.column("controller.y_ref_" + j.name));
    note("%-7s tracking rmse %.5f rad", j.name.c_str(), err);
    worst = std::max(worst, err);
  }
  note("%zu steps, %zu violation records, runtime %.3f s", outcome.trace.rows(), outcome.violations.size(), t);
  verdict(4, outcome.trace.rows() == 7000 && outcome.violations.empty() && worst < 0.05 && t < 10.0,
          "fault-free case study: no violations, tracking rmse < 0.05 rad, runtime < 10 s");
}

// 5 and 6 ----------------------------------------------------------------

SweepResult subset(const SweepResult& full, std::size_t seeds) {
  std::vector<CellResult> cells;
  for (const auto& c : full.cells) {
    if (c.replicate < seeds) cells.push_back(c);
  }
  return summarize_sweep(std::move(cells), seeds, full.base_seed, full.consecutive_gap_s, full.rmse_joint);
}

void print_table(const SweepResult& result) {
  note("%-6s %-12s %-8s %-8s %-10s %-10s", "d [s]", "mean pos", "fail", "n cons", "fail cons", "fail iso");
  for (const auto& s : result.summary) {
    note("%-6.2f %-12.6f %-8.3f %-8zu %-10.3f %-10.3f", s.duration, s.position.mean, s.failure_fraction,
         s.consecutive_runs, s.consecutive_failure_fraction, s.isolated_failure_fraction);
  }
}

void sweeps() {
  const auto config = load_scenario(kData + "/case_study.json");
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  Stopwatch clock;
  const auto full = run_sweep(make_sweep_plan(config, fine_durations(), 100, config.seed, jobs));
  const double t = clock.seconds();
  note("fine sweep, 100 seeds per duration, %u jobs: %.1f s (the 20-seed sweep is a subset of these cells)", jobs, t);

  const auto twenty = subset(full, 20);
  print_table(twenty);
  int inversions = 0;
  for (std::size_t i = 1; i < twenty.summary.size(); ++i) {
    inversions += twenty.summary[i].position.mean < twenty.summary[i - 1].position.mean ? 1 : 0;
  }
  const double ratio = twenty.summary.back().position.mean / twenty.summary.front().position.mean;
  const double a = twenty.fit_position ? twenty.fit_position->a : std::numeric_limits<double>::quiet_NaN();
  note("20 seeds: %d inversions, rmse(0.5)/rmse(0.05) = %.2f, quadratic a = %.4g", inversions, ratio, a);
  verdict(5, inversions <= 1 && ratio >= 5.0 && a > 0.0 && t < 600.0,
          "fine sweep position rmse grows with duration (<= 1 inversion, >= 5x, a > 0), runtime < 10 min");

  note("20 seeds: d* %s s, consecutive %s s, isolated %s s", opt(twenty.d_star).c_str(),
       opt(twenty.d_star_consecutive).c_str(), opt(twenty.d_star_isolated).c_str());
  print_table(full);
  note("100 seeds: d* %s s, consecutive %s s, isolated %s s, d_safe %s s", opt(full.d_star).c_str(),
       opt(full.d_star_consecutive).c_str(), opt(full.d_star_isolated).c_str(), opt(full.d_safe).c_str());
  note("reference figures: consecutive faults tolerated up to about 0.1 s, isolated up to about 0.3 s");
  const double inf = std::numeric_limits<double>::infinity();
  const bool exists = full.d_star && *full.d_star > 0.05 && *full.d_star < 0.5;
  const bool ordered = full.d_star_consecutive && *full.d_star_consecutive < full.d_star_isolated.value_or(inf);
  verdict(6, exists && ordered,
          "50% failure threshold lies in (0.05, 0.5) s and is lower for consecutive than isolated faults");
}

// 7 ----------------------------------------------------------------------

struct FlipTally {
  int nominal = 0, error = 0, failure = 0, diverged = 0, fired = 0;
};

FlipTally flip_campaign(int lo, int hi) {
  auto config = load_scenario(kData + "/case_study.json");
  FaultSpec spec{"seu", "plant.theta_knee_r", BitFlip{1, {}, lo, hi}, MeanTimeToFailure{3.5, 1.0}, Once{}};
  config.injectors = {spec};
  config.sweep.varied_injectors.clear();
  FlipTally tally;
  for (std::size_t i = 0; i < 100; ++i) {
    try {
      const auto outcome = run_scenario(config, replicate_seed(config.seed, i));
      tally.fired += outcome.activations.front().empty() ? 0 : 1;
      switch (outcome.classification) {
        case RunClass::Nominal: ++tally.nominal; break;
        case RunClass::Error: ++tally.error; break;
        case RunClass::Failure: ++tally.failure; break;
      }
    } catch (const NumericalDivergence&) {
      ++tally.diverged;
    }
  }
  return tally;
}

void bit_flips() {
  const auto report = [](const char* label, const FlipTally& t) {
    note("%-14s fired %3d/100: Nominal %3d, Error %3d, Failure %3d, diverged %3d", label, t.fired, t.nominal, t.error,
         t.failure, t.diverged);
  };
  const auto mantissa = flip_campaign(0, 51);
  report("mantissa 0-51", mantissa);
  report("exponent 52-62", flip_campaign(52, 62));
  report("sign 63", flip_campaign(63, 63));
  verdict(7, mantissa.fired == 100 && mantissa.failure == 0 && mantissa.diverged == 0,
          "single mantissa bit flips on the knee angle cause no Failure over 100 seeds");
}

// 8 ----------------------------------------------------------------------

void power() {
  // Independent evaluation of T * 2*pi*n / 60 in extended precision.
  const long double oracle = 72.9L * 2.0L * 3.141592653589793238462643383279L * 23.4L / 60.0L;
  const double p = joint_power(72.9, 23.4);
  double worst = 0.0;
  Rng rng(8);
  std::uniform_real_distribution<double> rpm(-1000.0, 1000.0);
  for (int i = 0; i < 1000000; ++i) {
    const double n = rpm(rng);
    if (n != 0.0) worst = std::max(worst, std::abs(rad_s_to_rpm(rpm_to_rad_s(n)) - n) / std::abs(n));
  }
  note("joint_power(72.9, 23.4) = %.6f W (direct evaluation %.6Lf W; quoted elsewhere as 178.65 W)", p, oracle);
  note("rpm round trip worst relative error %.3g over 1e6 values", worst);
  verdict(8, std::abs(p - 178.6372) < 0.01 && std::abs(p - static_cast<double>(oracle)) < 1e-12 && worst < 1e-12,
          "joint power equals 178.6372 W +/- 0.01 and rpm conversions round trip to 1e-12");
}

// 9 ----------------------------------------------------------------------

void determinism() {
  const auto root = fs::temp_directory_path() / "faultbench_acceptance";
  fs::remove_all(root);
  const std::string base = std::string(FAULTBENCH_EXE) + " --quiet sweep --preset fine --seeds 5 ";
  Stopwatch clock;
  const int c1 = shell(base + "--jobs 1 --out " + (root / "j1").string() + " " + kData + "/case_study.json");
  const int c8 = shell(base + "--jobs 8 --out " + (root / "j8").string() + " " + kData + "/case_study.json");
  const auto csv1 = slurp(root / "j1" / "sweep_results.csv");
  const auto csv8 = slurp(root / "j8" / "sweep_results.csv");
  const auto json1 = slurp(root / "j1" / "sweep_summary.json");
  const auto json8 = slurp(root / "j8" / "sweep_summary.json");
  note("exit codes %d and %d, csv %zu bytes, json %zu bytes, %.1f s", c1, c8, csv1.size(), json1.size(),
       clock.seconds());
  fs::remove_all(root);
  verdict(9, c1 == 0 && c8 == 0 && !csv1.empty() && !json1.empty() && csv1 == csv8 && json1 == json8,
          "sweep outputs are byte-identical for --jobs 1 and --jobs 8");
}

template <typename F>
void guarded(int id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, fault_suite);
  guarded(2, stochastic);
  guarded(3, dmp_attractor);
  guarded(4, baseline);
  guarded(5, sweeps);
  guarded(7, bit_flips);
  guarded(8, power);
  guarded(9, determinism);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
