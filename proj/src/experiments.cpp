#include "faultbench/experiments.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace faultbench {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Calls body(i) for i in [0, count) on up to `jobs` threads and rethrows
/// the exception of the lowest failing index.
template <typename Body> void parallel_for(std::size_t count, unsigned jobs, Body body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::max<std::size_t>(1, std::min<std::size_t>(jobs, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

RunOutcome execute(ScenarioConfig config, std::uint64_t seed, bool disable_faults,
                   std::vector<std::string> monitored) {
  if (disable_faults) {
    for (auto& spec : config.injectors) spec.enabled = false;
  }
  if (!monitored.empty()) config.monitored = std::move(monitored);
  auto graph = build_graph(config);
  RunOutcome outcome;
  outcome.trace = run(graph, config.clock, seed);
  outcome.violations = graph.get<MonitorBlock>("monitor").violations();
  outcome.classification = classify_run(outcome.violations);
  for (const auto& spec : config.injectors) {
    outcome.activations.push_back(graph.get<InjectorBlock>(spec.name).activations());
  }
  return outcome;
}

std::string joint_of_signal(const std::string& signal) {
  for (const auto& joint : joint_names()) {
    if (signal.size() > joint.size() && signal.compare(signal.size() - joint.size(), joint.size(), joint) == 0 &&
        signal[signal.size() - joint.size() - 1] == '_') {
      return joint;
    }
  }
  return {};
}

MetricStats stats(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

/// Rounds to the precision written to the results CSV so that the summary
/// can be rebuilt exactly from the CSV.
double quantize(double value) { return std::stod(format_number(value)); }

json optional_number(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

json fraction_json(double value) { return std::isnan(value) ? json(nullptr) : json(value); }

std::optional<double> read_optional(const json& node, const char* key) {
  if (!node.contains(key) || node[key].is_null()) return std::nullopt;
  return node[key].get<double>();
}

json fit_json(const std::optional<QuadraticFit>& fit) {
  if (!fit) return nullptr;
  return {{"a", fit->a}, {"b", fit->b}, {"c", fit->c}, {"residual", fit->residual}};
}

std::optional<QuadraticFit> read_fit(const json& node) {
  if (node.is_null()) return std::nullopt;
  return QuadraticFit{node["a"].get<double>(), node["b"].get<double>(), node["c"].get<double>(),
                      node["residual"].get<double>()};
}

json stats_json(const MetricStats& s) { return {{"mean", s.mean}, {"min", s.min}, {"max", s.max}}; }

MetricStats read_stats(const json& node) {
  return {node["mean"].get<double>(), node["min"].get<double>(), node["max"].get<double>()};
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream row(line);
  std::string cell;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

SweepCellError::SweepCellError(double duration, std::uint64_t seed, const std::string& what, bool diverged)
    : SimError("sweep cell duration=" + format_number(duration) + "s seed=" + std::to_string(seed) + ": " + what),
      duration_(duration),
      seed_(seed),
      diverged_(diverged) {}

const char* run_class_name(RunClass value) {
  switch (value) {
    case RunClass::Nominal:
      return "Nominal";
    case RunClass::Error:
      return "Error";
    case RunClass::Failure:
      return "Failure";
  }
  return "?";
}

RunClass parse_run_class(const std::string& text) {
  if (text == "Nominal") return RunClass::Nominal;
  if (text == "Error") return RunClass::Error;
  if (text == "Failure") return RunClass::Failure;
  throw std::invalid_argument("unknown classification '" + text + "'");
}

RunClass classify_run(std::span<const ViolationRecord> violations) {
  bool error = false;
  for (const auto& record : violations) {
    if (record.kind == ViolationKind::AngleFailure) return RunClass::Failure;
    error = true;
  }
  return error ? RunClass::Error : RunClass::Nominal;
}

double rmse(std::span<const double> faulty, std::span<const double> reference) {
  if (faulty.size() != reference.size()) {
    throw LengthMismatch("rmse: traces differ in length (" + std::to_string(faulty.size()) + " vs " +
                         std::to_string(reference.size()) + ")");
  }
  if (faulty.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < faulty.size(); ++i) {
    const double d = faulty[i] - reference[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(faulty.size()));
}

QuadraticFit fit_quadratic(std::span<const std::pair<double, double>> points) {
  std::vector<double> xs;
  for (const auto& p : points) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3) {
    throw DegenerateFit("quadratic fit needs at least 3 distinct durations");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[static_cast<std::size_t>(i)].first;
    design(i, 0) = x * x;
    design(i, 1) = x;
    design(i, 2) = 1.0;
    y(i) = points[static_cast<std::size_t>(i)].second;
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
  QuadraticFit fit{coef(0), coef(1), coef(2), 0.0};
  fit.residual = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(n));
  return fit;
}

RunOutcome run_scenario(const ScenarioConfig& config, std::uint64_t seed, bool disable_faults) {
  return execute(config, seed, disable_faults, {});
}

std::optional<double> min_activation_gap(std::span<const Activation> activations, double dt) {
  std::optional<double> gap;
  for (std::size_t i = 1; i < activations.size(); ++i) {
    const double clean = activations[i].t_on - activations[i - 1].t_off - dt;
    gap = gap ? std::min(*gap, clean) : clean;
  }
  if (gap) gap = std::max(0.0, *gap);
  return gap;
}

std::vector<double> fine_durations() {
  std::vector<double> d;
  for (int i = 1; i <= 10; ++i) d.push_back(i / 20.0);
  return d;
}

std::vector<double> coarse_durations() {
  std::vector<double> d;
  for (int i = 0; i <= 10; ++i) d.push_back(0.5 + 0.25 * i);
  return d;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t index) {
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

SweepPlan make_sweep_plan(ScenarioConfig scenario, std::vector<double> durations, std::size_t seeds,
                          std::uint64_t base_seed, unsigned jobs) {
  if (durations.empty()) throw std::invalid_argument("sweep needs at least one duration");
  for (auto& d : durations) d = quantize(d);
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (!(durations[i] >= 0.0) || !std::isfinite(durations[i])) {
      throw std::invalid_argument("sweep durations must be finite and >= 0");
    }
    if (i > 0 && !(durations[i] > durations[i - 1])) {
      throw std::invalid_argument("sweep durations must be strictly increasing");
    }
  }
  if (seeds == 0) throw std::invalid_argument("sweep needs at least one seed per duration");

  SweepPlan plan;
  plan.durations = std::move(durations);
  plan.seeds_per_duration = seeds;
  plan.base_seed = base_seed;
  plan.jobs = std::max(1u, jobs);
  plan.consecutive_gap_s = scenario.sweep.consecutive_gap_s;
  plan.varied_injectors = scenario.sweep.varied_injectors;
  if (plan.varied_injectors.empty()) {
    for (const auto& spec : scenario.injectors) {
      if (std::holds_alternative<ConstantTime>(spec.effect)) plan.varied_injectors.push_back(spec.name);
    }
  }
  if (plan.varied_injectors.empty()) throw std::invalid_argument("scenario has no ConstantTime injector to sweep");
  for (const auto& name : plan.varied_injectors) {
    const auto* spec = scenario.find_injector(name);
    if (spec == nullptr) throw std::invalid_argument("unknown varied injector '" + name + "'");
    if (!std::holds_alternative<ConstantTime>(spec->effect)) {
      throw std::invalid_argument("varied injector '" + name + "' must use a ConstantTime effect");
    }
  }
  // Chain head first: the varied injector nobody else triggers.
  std::stable_sort(plan.varied_injectors.begin(), plan.varied_injectors.end(),
                   [&](const std::string& a, const std::string& b) {
                     auto triggered = [&](const std::string& name) {
                       return std::any_of(scenario.injectors.begin(), scenario.injectors.end(),
                                          [&](const FaultSpec& s) { return s.chain_to && *s.chain_to == name; });
                     };
                     return !triggered(a) && triggered(b);
                   });
  plan.rmse_joint = scenario.sweep.rmse_joint;
  if (plan.rmse_joint.empty()) plan.rmse_joint = joint_of_signal(scenario.find_injector(plan.varied_injectors.front())->target_signal);
  if (plan.rmse_joint.empty()) throw std::invalid_argument("cannot determine the joint for RMSE evaluation");
  plan.scenario = std::move(scenario);
  if (!plan.scenario.demo) {
    plan.scenario.demo = std::make_shared<const DemoTrajectory>(load_demo_csv(plan.scenario.demo_path().string()));
  }
  return plan;
}

std::optional<double> failure_threshold(std::span<const double> durations, std::span<const double> fractions,
                                        double level) {
  std::optional<std::pair<double, double>> previous;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (std::isnan(fractions[i])) continue;
    if (fractions[i] >= level) {
      if (!previous) return durations[i];
      const auto [d0, f0] = *previous;
      return d0 + (level - f0) / (fractions[i] - f0) * (durations[i] - d0);
    }
    previous = std::pair{durations[i], fractions[i]};
  }
  return std::nullopt;
}

SweepResult run_sweep(const SweepPlan& plan) {
  const auto& joint = plan.rmse_joint;
  const std::vector<std::string> signals{"plant.theta_" + joint, "plant.omega_" + joint, "controller.tau_" + joint};
  const auto replicates = plan.seeds_per_duration;
  const auto head = std::find_if(plan.scenario.injectors.begin(), plan.scenario.injectors.end(),
                                 [&](const FaultSpec& s) { return s.name == plan.varied_injectors.front(); }) -
                    plan.scenario.injectors.begin();

  std::vector<TraceLog> references(replicates);
  parallel_for(replicates, plan.jobs, [&](std::size_t i) {
    const auto seed = replicate_seed(plan.base_seed, i);
    try {
      references[i] = execute(plan.scenario, seed, true, signals).trace;
    } catch (const NumericalDivergence& e) {
      throw SweepCellError(0.0, seed, std::string("reference run: ") + e.what(), true);
    } catch (const SimError& e) {
      throw SweepCellError(0.0, seed, std::string("reference run: ") + e.what());
    }
  });

  std::vector<CellResult> cells(plan.durations.size() * replicates);
  parallel_for(cells.size(), plan.jobs, [&](std::size_t index) {
    const auto duration = plan.durations[index / replicates];
    const auto replicate = index % replicates;
    const auto seed = replicate_seed(plan.base_seed, replicate);

    auto config = plan.scenario;
    const bool no_window = duration == 0.0;
    if (!no_window) {
      for (const auto& name : plan.varied_injectors) config.find_injector(name)->effect = ConstantTime{duration};
    }
    RunOutcome outcome;
    try {
      outcome = execute(std::move(config), seed, no_window, signals);
    } catch (const NumericalDivergence& e) {
      throw SweepCellError(duration, seed, e.what(), true);
    } catch (const SimError& e) {
      throw SweepCellError(duration, seed, e.what());
    }
    const auto& reference = references[replicate];
    CellResult& cell = cells[index];
    cell.duration = duration;
    cell.replicate = replicate;
    cell.seed = seed;
    cell.rmse_position = quantize(rmse(outcome.trace.columns[0], reference.columns[0]));
    cell.rmse_velocity = quantize(rmse(outcome.trace.columns[1], reference.columns[1]));
    cell.rmse_torque = quantize(rmse(outcome.trace.columns[2], reference.columns[2]));
    cell.classification = outcome.classification;
    const auto& log = outcome.activations[static_cast<std::size_t>(head)];
    cell.activations = log.size();
    cell.min_gap_s = quantize(min_activation_gap(log, plan.scenario.clock.dt).value_or(-1.0));
  });

  return summarize_sweep(std::move(cells), replicates, plan.base_seed, plan.consecutive_gap_s, plan.rmse_joint);
}

SweepResult summarize_sweep(std::vector<CellResult> cells, std::size_t seeds_per_duration, std::uint64_t base_seed,
                            double consecutive_gap_s, std::string rmse_joint) {
  SweepResult result;
  result.seeds_per_duration = seeds_per_duration;
  result.base_seed = base_seed;
  result.consecutive_gap_s = consecutive_gap_s;
  result.rmse_joint = std::move(rmse_joint);

  std::vector<double> durations;
  for (const auto& cell : cells) {
    if (durations.empty() || durations.back() != cell.duration) {
      if (std::find(durations.begin(), durations.end(), cell.duration) == durations.end()) {
        durations.push_back(cell.duration);
      }
    }
  }
  std::sort(durations.begin(), durations.end());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> failure, consecutive, isolated;
  for (const double d : durations) {
    DurationSummary s;
    s.duration = d;
    std::vector<double> pos, vel, tau;
    std::size_t nominal = 0, error = 0, failed = 0, consecutive_failed = 0, isolated_failed = 0;
    for (const auto& cell : cells) {
      if (cell.duration != d) continue;
      pos.push_back(cell.rmse_position);
      vel.push_back(cell.rmse_velocity);
      tau.push_back(cell.rmse_torque);
      const bool is_failure = cell.classification == RunClass::Failure;
      nominal += cell.classification == RunClass::Nominal;
      error += cell.classification == RunClass::Error;
      failed += is_failure;
      if (cell.activations >= 2 && cell.min_gap_s >= 0.0 && cell.min_gap_s < consecutive_gap_s) {
        ++s.consecutive_runs;
        consecutive_failed += is_failure;
      } else if (cell.activations >= 1) {
        ++s.isolated_runs;
        isolated_failed += is_failure;
      }
    }
    s.runs = pos.size();
    s.position = stats(pos);
    s.velocity = stats(vel);
    s.torque = stats(tau);
    const auto runs = static_cast<double>(s.runs);
    s.nominal_fraction = static_cast<double>(nominal) / runs;
    s.error_fraction = static_cast<double>(error) / runs;
    s.failure_fraction = static_cast<double>(failed) / runs;
    s.consecutive_failure_fraction =
        s.consecutive_runs ? static_cast<double>(consecutive_failed) / static_cast<double>(s.consecutive_runs) : nan;
    s.isolated_failure_fraction =
        s.isolated_runs ? static_cast<double>(isolated_failed) / static_cast<double>(s.isolated_runs) : nan;
    failure.push_back(s.failure_fraction);
    consecutive.push_back(s.consecutive_failure_fraction);
    isolated.push_back(s.isolated_failure_fraction);
    result.summary.push_back(s);
  }

  std::vector<std::pair<double, double>> pos_points, vel_points, tau_points;
  for (const auto& s : result.summary) {
    pos_points.emplace_back(s.duration, s.position.mean);
    vel_points.emplace_back(s.duration, s.velocity.mean);
    tau_points.emplace_back(s.duration, s.torque.mean);
  }
  if (durations.size() >= 3) {
    result.fit_position = fit_quadratic(pos_points);
    result.fit_velocity = fit_quadratic(vel_points);
    result.fit_torque = fit_quadratic(tau_points);
  }

  result.d_star = failure_threshold(durations, failure);
  result.d_star_consecutive = failure_threshold(durations, consecutive);
  result.d_star_isolated = failure_threshold(durations, isolated);
  for (std::size_t i = 0; i < durations.size() && failure[i] <= 0.1; ++i) result.d_safe = durations[i];

  result.cells = std::move(cells);
  return result;
}

void write_results_csv(std::ostream& os, std::span<const CellResult> cells) {
  os << "duration_s,seed,rmse_pos_rad,rmse_vel_rad_s,rmse_torque_Nm,classification,activations,min_gap_s\n";
  for (const auto& c : cells) {
    os << format_number(c.duration) << ',' << c.seed << ',' << format_number(c.rmse_position) << ','
       << format_number(c.rmse_velocity) << ',' << format_number(c.rmse_torque) << ','
       << run_class_name(c.classification) << ',' << c.activations << ',' << format_number(c.min_gap_s) << '\n';
  }
}

std::vector<CellResult> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("duration_s,seed,", 0) != 0) {
    throw std::runtime_error("results CSV: unexpected header");
  }
  std::vector<CellResult> cells;
  std::vector<double> seen_durations;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw std::runtime_error("results CSV: expected 8 columns, got " + std::to_string(f.size()));
    CellResult c;
    c.duration = std::stod(f[0]);
    c.seed = std::stoull(f[1]);
    c.rmse_position = std::stod(f[2]);
    c.rmse_velocity = std::stod(f[3]);
    c.rmse_torque = std::stod(f[4]);
    c.classification = parse_run_class(f[5]);
    c.activations = std::stoull(f[6]);
    c.min_gap_s = std::stod(f[7]);
    c.replicate = static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [&](const CellResult& other) { return other.duration == c.duration; }));
    cells.push_back(c);
  }
  return cells;
}

void write_summary_json(std::ostream& os, const SweepResult& result) {
  json root;
  root["seeds_per_duration"] = result.seeds_per_duration;
  root["base_seed"] = result.base_seed;
  root["rmse_joint"] = result.rmse_joint;
  root["consecutive_gap_s"] = result.consecutive_gap_s;
  root["per_duration"] = json::array();
  for (const auto& s : result.summary) {
    root["per_duration"].push_back({{"duration_s", s.duration},
                                    {"runs", s.runs},
                                    {"rmse_pos_rad", stats_json(s.position)},
                                    {"rmse_vel_rad_s", stats_json(s.velocity)},
                                    {"rmse_torque_Nm", stats_json(s.torque)},
                                    {"nominal_fraction", s.nominal_fraction},
                                    {"error_fraction", s.error_fraction},
                                    {"failure_fraction", s.failure_fraction},
                                    {"consecutive_runs", s.consecutive_runs},
                                    {"isolated_runs", s.isolated_runs},
                                    {"consecutive_failure_fraction", fraction_json(s.consecutive_failure_fraction)},
                                    {"isolated_failure_fraction", fraction_json(s.isolated_failure_fraction)}});
  }
  root["fit"] = {{"rmse_pos_rad", fit_json(result.fit_position)},
                 {"rmse_vel_rad_s", fit_json(result.fit_velocity)},
                 {"rmse_torque_Nm", fit_json(result.fit_torque)}};
  root["d_star_s"] = optional_number(result.d_star);
  root["d_star_consecutive_s"] = optional_number(result.d_star_consecutive);
  root["d_star_isolated_s"] = optional_number(result.d_star_isolated);
  root["d_safe_s"] = optional_number(result.d_safe);
  os << root.dump(2) << '\n';
}

SweepResult read_summary_json(std::istream& is) {
  const auto root = json::parse(is);
  SweepResult result;
  result.seeds_per_duration = root["seeds_per_duration"].get<std::size_t>();
  result.base_seed = root["base_seed"].get<std::uint64_t>();
  result.rmse_joint = root["rmse_joint"].get<std::string>();
  result.consecutive_gap_s = root["consecutive_gap_s"].get<double>();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& node : root["per_duration"]) {
    DurationSummary s;
    s.duration = node["duration_s"].get<double>();
    s.runs = node["runs"].get<std::size_t>();
    s.position = read_stats(node["rmse_pos_rad"]);
    s.velocity = read_stats(node["rmse_vel_rad_s"]);
    s.torque = read_stats(node["rmse_torque_Nm"]);
    s.nominal_fraction = node["nominal_fraction"].get<double>();
    s.error_fraction = node["error_fraction"].get<double>();
    s.failure_fraction = node["failure_fraction"].get<double>();
    s.consecutive_runs = node["consecutive_runs"].get<std::size_t>();
    s.isolated_runs = node["isolated_runs"].get<std::size_t>();
    s.consecutive_failure_fraction = read_optional(node, "consecutive_failure_fraction").value_or(nan);
    s.isolated_failure_fraction = read_optional(node, "isolated_failure_fraction").value_or(nan);
    result.summary.push_back(s);
  }
  result.fit_position = read_fit(root["fit"]["rmse_pos_rad"]);
  result.fit_velocity = read_fit(root["fit"]["rmse_vel_rad_s"]);
  result.fit_torque = read_fit(root["fit"]["rmse_torque_Nm"]);
  result.d_star = read_optional(root, "d_star_s");
  result.d_star_consecutive = read_optional(root, "d_star_consecutive_s");
  result.d_star_isolated = read_optional(root, "d_star_isolated_s");
  result.d_safe = read_optional(root, "d_safe_s");
  return result;
}

std::string render_rmse_svg(const SweepResult& result, const std::string& title) {
  constexpr double width = 720, height = 440, left = 70, right = 20, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0.0, x_max = 1.0, y_max = 1e-9;
  if (!result.summary.empty()) {
    x_min = result.summary.front().duration;
    x_max = result.summary.back().duration;
    if (x_max <= x_min) x_max = x_min + 1.0;
  }
  for (const auto& s : result.summary) y_max = std::max(y_max, s.position.max);
  if (result.fit_position) {
    for (int i = 0; i <= 100; ++i) y_max = std::max(y_max, (*result.fit_position)(x_min + (x_max - x_min) * i / 100.0));
  }
  y_max *= 1.1;
  const double pad = 0.04 * (x_max - x_min);
  x_min -= pad;
  x_max += pad;

  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + plot_h - std::clamp(y / y_max, -0.05, 1.05) * plot_h; };
  auto num = [](double v) { return format_number(std::round(v * 100.0) / 100.0); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = y_max / 1.1 * i / 5.0;
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << num(py(y)) << "\" x2=\"" << left << "\" y2=\"" << num(py(y))
        << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << num(py(y) + 4)
        << "\" text-anchor=\"end\">" << format_number(std::round(y * 1000.0) / 1000.0) << "</text>\n";
  }
  for (const auto& s : result.summary) {
    svg << "<text x=\"" << num(px(s.duration)) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << format_number(s.duration) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">fault duration [s]</text>\n";
  svg << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">RMSE angular position [rad]</text>\n";

  for (const auto& s : result.summary) {
    const auto x = num(px(s.duration));
    svg << "<line x1=\"" << x << "\" y1=\"" << num(py(s.position.min)) << "\" x2=\"" << x << "\" y2=\""
        << num(py(s.position.max)) << "\" stroke=\"#555\"/>\n";
  }
  if (result.fit_position && !result.summary.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"purple\" stroke-width=\"2\" points=\"";
    const double a = result.summary.front().duration;
    const double b = result.summary.back().duration;
    for (int i = 0; i <= 100; ++i) {
      const double x = a + (b - a) * i / 100.0;
      svg << (i ? " " : "") << num(px(x)) << ',' << num(py((*result.fit_position)(x)));
    }
    svg << "\"/>\n";
  }
  for (const auto& s : result.summary) {
    svg << "<rect x=\"" << num(px(s.duration) - 4) << "\" y=\"" << num(py(s.position.mean) - 4)
        << "\" width=\"8\" height=\"8\" fill=\"red\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_violations_csv(std::ostream& os, std::span<const ViolationRecord> violations) {
  os << "t,joint,kind,value\n";
  for (const auto& v : violations) {
    os << format_number(v.t) << ',' << v.joint << ',' << violation_kind_name(v.kind) << ',' << format_number(v.value)
       << '\n';
  }
}

std::vector<ViolationRecord> read_violations_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,joint,kind,value") throw std::runtime_error("violations CSV: bad header");
  std::vector<ViolationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw std::runtime_error("violations CSV: expected 4 columns");
    out.push_back({std::stod(f[0]), f[1], parse_violation_kind(f[2]), std::stod(f[3])});
  }
  return out;
}

}  // namespace faultbench
