#pragma once

/// @file scenario.hpp
/// @brief Scenario configuration: JSON schema, semantic validation and
/// construction of the block graph.
///
/// Graph layout for a scenario with joints J and injectors I:
///
///   plant.theta_J ──[injectors on it]──▶ controller.theta_J
///   plant.omega_J ──[injectors on it]──▶ controller.omega_J
///   controller.tau_J ──[injectors on it]──▶ plant.tau_J
///   plant.theta_J, plant.omega_J, controller.tau_cmd_J ──▶ monitor
///
/// Injectors only sit on the data path; the monitor always sees the true
/// plant state. Several injectors on one signal are chained in declaration
/// order, and `chain_to` wires an injector's trigger output to the trigger
/// input of the named injector.

#include "faultbench/dmp.hpp"
#include "faultbench/engine.hpp"
#include "faultbench/faults.hpp"
#include "faultbench/plant.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace faultbench {

/// Malformed configuration text (syntax, types, unknown kinds).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DmpConfig {
  double alpha_z{25.0};
  /// Only present when overridden; must equal alpha_z / 4.
  std::optional<double> beta_z;
  double alpha_s{4.6};
  std::size_t n_basis{50};
  double basis_width{4.0};
  /// Defaults to the demonstration's duration.
  std::optional<double> tau_s;
  std::string demo_file;
};

struct SweepConfig {
  /// Injectors whose ConstantTime duration is swept; empty selects every
  /// ConstantTime injector.
  std::vector<std::string> varied_injectors;
  /// Joint whose traces feed the RMSE metrics; empty selects the joint of
  /// the first varied injector's target.
  std::string rmse_joint;
  /// Runs whose minimum gap between fault windows is below this count as
  /// consecutive-fault runs.
  double consecutive_gap_s{0.5};
};

struct ScenarioConfig {
  std::string name;
  SimClock clock{1e-3, 7.0};
  std::vector<JointParams> joints;
  DmpConfig dmp;
  ControlGains control;
  std::vector<FaultSpec> injectors;
  std::vector<std::string> monitored;
  std::uint64_t seed{1};
  SweepConfig sweep;

  /// Directory that relative paths are resolved against.
  std::filesystem::path base_dir;
  /// Loaded demonstration; build_graph() loads dmp.demo_file when null.
  std::shared_ptr<const DemoTrajectory> demo;
  /// Keys present in the file but not in the schema.
  std::vector<std::string> unknown_fields;

  std::filesystem::path demo_path() const;
  const FaultSpec* find_injector(std::string_view name) const;
  FaultSpec* find_injector(std::string_view name);
};

/// Parses scenario JSON text. Throws ConfigError on malformed input.
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads and parses a scenario file and loads its demonstration if present.
/// Throws ConfigError when the file cannot be read or parsed.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Serialises back to the same schema (demo path kept as written).
std::string scenario_to_json(const ScenarioConfig& config);

/// Every semantic violation, in a stable order; empty when valid.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Names of all signals the scenario's graph will expose.
std::vector<std::string> scenario_signals(const ScenarioConfig& config);

/// Learns the DMPs and wires plant, controller, injectors and monitor.
/// Throws WiringError / AlgebraicLoop for inconsistent wiring.
BlockGraph build_graph(const ScenarioConfig& config);

}  // namespace faultbench
