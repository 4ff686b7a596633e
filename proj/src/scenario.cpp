#include "faultbench/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace faultbench {

namespace {

using nlohmann::json;

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

class Reader {
public:
  explicit Reader(std::vector<std::string>& unknown) : unknown_(unknown) {}

  void keys(const json& object, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!object.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : object.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) unknown_.push_back(where + "." + key);
    }
  }

  static double number(const json& object, const char* key, const std::string& where) {
    const auto it = object.find(key);
    if (it == object.end()) throw ConfigError(where + ": missing '" + key + "'");
    if (!it->is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return it->get<double>();
  }

  static double number_or(const json& object, const char* key, double fallback, const std::string& where) {
    return object.contains(key) ? number(object, key, where) : fallback;
  }

  static std::string string(const json& object, const char* key, const std::string& where) {
    const auto it = object.find(key);
    if (it == object.end()) throw ConfigError(where + ": missing '" + key + "'");
    if (!it->is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return it->get<std::string>();
  }

  static std::vector<std::string> strings(const json& value, const std::string& where) {
    if (!value.is_array()) throw ConfigError(where + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& item : value) {
      if (!item.is_string()) throw ConfigError(where + ": expected an array of strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  FaultType fault_type(const json& node, const std::string& where) {
    const auto kind = string(node, "kind", where);
    if (kind == "StuckAt") {
      keys(node, where, {"kind"});
      return StuckAt{};
    }
    if (kind == "PackageDrop") {
      keys(node, where, {"kind", "replacement"});
      return PackageDrop{number_or(node, "replacement", 0.0, where)};
    }
    if (kind == "Bias") {
      keys(node, where, {"kind", "offset"});
      return Bias{number(node, "offset", where)};
    }
    if (kind == "Noise") {
      keys(node, where, {"kind", "boundary_pct"});
      return Noise{number(node, "boundary_pct", where)};
    }
    if (kind == "TimeDelay") {
      keys(node, where, {"kind", "delay_s"});
      return TimeDelay{number(node, "delay_s", where)};
    }
    if (kind == "BitFlip") {
      keys(node, where, {"kind", "n_bits", "bit_positions", "random_range"});
      BitFlip flip;
      const double n = number(node, "n_bits", where);
      if (n != std::floor(n)) throw ConfigError(where + ".n_bits: expected an integer");
      flip.n_bits = static_cast<int>(n);
      if (const auto it = node.find("bit_positions"); it != node.end()) {
        if (it->is_string()) {
          if (it->get<std::string>() != "random") throw ConfigError(where + ".bit_positions: expected \"random\" or a list");
        } else if (it->is_array()) {
          for (const auto& bit : *it) {
            if (!bit.is_number_integer()) throw ConfigError(where + ".bit_positions: expected integers");
            flip.positions.push_back(bit.get<int>());
          }
        } else {
          throw ConfigError(where + ".bit_positions: expected \"random\" or a list");
        }
      }
      if (const auto it = node.find("random_range"); it != node.end()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer()) {
          throw ConfigError(where + ".random_range: expected [lo, hi]");
        }
        flip.random_lo = (*it)[0].get<int>();
        flip.random_hi = (*it)[1].get<int>();
      }
      return flip;
    }
    throw ConfigError(where + ": unknown fault type '" + kind + "'");
  }

  FaultEvent event(const json& node, const std::string& where) {
    const auto kind = string(node, "kind", where);
    if (kind == "FailureProbability") {
      keys(node, where, {"kind", "p"});
      return FailureProbability{number(node, "p", where)};
    }
    if (kind == "MeanTimeToFailure") {
      keys(node, where, {"kind", "mttf_s", "sigma_s"});
      return MeanTimeToFailure{number(node, "mttf_s", where), number_or(node, "sigma_s", 0.0, where)};
    }
    throw ConfigError(where + ": unknown fault event '" + kind + "'");
  }

  FaultEffect effect(const json& node, const std::string& where) {
    const auto kind = string(node, "kind", where);
    if (kind == "Once") {
      keys(node, where, {"kind"});
      return Once{};
    }
    if (kind == "ConstantTime") {
      keys(node, where, {"kind", "duration_s"});
      return ConstantTime{number(node, "duration_s", where)};
    }
    if (kind == "InfiniteTime") {
      keys(node, where, {"kind"});
      return InfiniteTime{};
    }
    if (kind == "MeanTimeToRepair") {
      keys(node, where, {"kind", "mttr_s", "sigma_s"});
      return MeanTimeToRepair{number(node, "mttr_s", where), number_or(node, "sigma_s", 0.0, where)};
    }
    throw ConfigError(where + ": unknown fault effect '" + kind + "'");
  }

private:
  std::vector<std::string>& unknown_;
};

json fault_type_json(const FaultType& type) {
  return std::visit(overloaded{
                        [](const StuckAt&) { return json{{"kind", "StuckAt"}}; },
                        [](const PackageDrop& f) { return json{{"kind", "PackageDrop"}, {"replacement", f.replacement}}; },
                        [](const Bias& f) { return json{{"kind", "Bias"}, {"offset", f.offset}}; },
                        [](const Noise& f) { return json{{"kind", "Noise"}, {"boundary_pct", f.boundary_pct}}; },
                        [](const TimeDelay& f) { return json{{"kind", "TimeDelay"}, {"delay_s", f.delay}}; },
                        [](const BitFlip& f) {
                          json node{{"kind", "BitFlip"}, {"n_bits", f.n_bits}};
                          if (f.positions.empty()) {
                            node["bit_positions"] = "random";
                            node["random_range"] = {f.random_lo, f.random_hi};
                          } else {
                            node["bit_positions"] = f.positions;
                          }
                          return node;
                        },
                    },
                    type);
}

json event_json(const FaultEvent& event) {
  return std::visit(overloaded{
                        [](const FailureProbability& e) { return json{{"kind", "FailureProbability"}, {"p", e.p}}; },
                        [](const MeanTimeToFailure& e) {
                          return json{{"kind", "MeanTimeToFailure"}, {"mttf_s", e.mttf}, {"sigma_s", e.sigma}};
                        },
                    },
                    event);
}

json effect_json(const FaultEffect& effect) {
  return std::visit(overloaded{
                        [](const Once&) { return json{{"kind", "Once"}}; },
                        [](const ConstantTime& e) { return json{{"kind", "ConstantTime"}, {"duration_s", e.duration}}; },
                        [](const InfiniteTime&) { return json{{"kind", "InfiniteTime"}}; },
                        [](const MeanTimeToRepair& e) {
                          return json{{"kind", "MeanTimeToRepair"}, {"mttr_s", e.mttr}, {"sigma_s", e.sigma}};
                        },
                    },
                    effect);
}

/// Data-path sources an injector may sit on, mapped to their consumer port.
struct DataPath {
  std::string source;
  std::string sink;
};

std::vector<DataPath> data_paths(const std::vector<JointParams>& joints) {
  std::vector<DataPath> paths;
  for (const auto& joint : joints) {
    paths.push_back({"plant.theta_" + joint.name, "controller.theta_" + joint.name});
    paths.push_back({"plant.omega_" + joint.name, "controller.omega_" + joint.name});
    paths.push_back({"controller.tau_" + joint.name, "plant.tau_" + joint.name});
  }
  return paths;
}

}  // namespace

std::filesystem::path ScenarioConfig::demo_path() const {
  const std::filesystem::path path(dmp.demo_file);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

const FaultSpec* ScenarioConfig::find_injector(std::string_view name) const {
  for (const auto& spec : injectors) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

FaultSpec* ScenarioConfig::find_injector(std::string_view name) {
  return const_cast<FaultSpec*>(std::as_const(*this).find_injector(name));
}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON syntax error: ") + e.what());
  }

  ScenarioConfig config;
  config.base_dir = base_dir;
  Reader reader(config.unknown_fields);
  reader.keys(root, "scenario",
              {"name", "clock", "joints", "dmp", "control", "injectors", "monitors", "seed", "sweep"});

  if (root.contains("name")) config.name = Reader::string(root, "name", "scenario");

  if (const auto it = root.find("clock"); it != root.end()) {
    reader.keys(*it, "clock", {"dt_s", "t_end_s"});
    config.clock.dt = Reader::number_or(*it, "dt_s", config.clock.dt, "clock");
    config.clock.t_end = Reader::number_or(*it, "t_end_s", config.clock.t_end, "clock");
  }

  const auto joints_it = root.find("joints");
  if (joints_it == root.end() || !joints_it->is_array()) throw ConfigError("scenario: 'joints' must be an array");
  for (std::size_t i = 0; i < joints_it->size(); ++i) {
    const auto& node = (*joints_it)[i];
    const auto where = "joints[" + std::to_string(i) + "]";
    reader.keys(node, where,
                {"name", "inertia_kg_m2", "damping_Nm_s_rad", "rot_min_deg", "rot_max_deg", "max_torque_Nm",
                 "max_speed_rpm"});
    const auto name = Reader::string(node, "name", where);
    JointParams joint;
    try {
      joint = default_joint(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError(where + ": unknown joint '" + name + "'");
    }
    joint.inertia = Reader::number_or(node, "inertia_kg_m2", joint.inertia, where);
    joint.damping = Reader::number_or(node, "damping_Nm_s_rad", joint.damping, where);
    if (node.contains("rot_min_deg")) joint.rot_min = deg_to_rad(Reader::number(node, "rot_min_deg", where));
    if (node.contains("rot_max_deg")) joint.rot_max = deg_to_rad(Reader::number(node, "rot_max_deg", where));
    joint.max_torque = Reader::number_or(node, "max_torque_Nm", joint.max_torque, where);
    joint.max_speed_rpm = Reader::number_or(node, "max_speed_rpm", joint.max_speed_rpm, where);
    config.joints.push_back(joint);
  }

  const auto dmp_it = root.find("dmp");
  if (dmp_it == root.end()) throw ConfigError("scenario: missing 'dmp'");
  reader.keys(*dmp_it, "dmp", {"alpha_z", "beta_z", "alpha_s", "n_basis", "basis_width", "tau_s", "demo_file"});
  config.dmp.alpha_z = Reader::number_or(*dmp_it, "alpha_z", config.dmp.alpha_z, "dmp");
  if (dmp_it->contains("beta_z")) config.dmp.beta_z = Reader::number(*dmp_it, "beta_z", "dmp");
  config.dmp.alpha_s = Reader::number_or(*dmp_it, "alpha_s", config.dmp.alpha_s, "dmp");
  if (dmp_it->contains("n_basis")) {
    const auto& n = (*dmp_it)["n_basis"];
    if (!n.is_number_unsigned()) throw ConfigError("dmp.n_basis: expected a non-negative integer");
    config.dmp.n_basis = n.get<std::size_t>();
  }
  config.dmp.basis_width = Reader::number_or(*dmp_it, "basis_width", config.dmp.basis_width, "dmp");
  if (dmp_it->contains("tau_s")) config.dmp.tau_s = Reader::number(*dmp_it, "tau_s", "dmp");
  config.dmp.demo_file = Reader::string(*dmp_it, "demo_file", "dmp");

  if (const auto it = root.find("control"); it != root.end()) {
    reader.keys(*it, "control", {"kp", "kd"});
    config.control.kp = Reader::number_or(*it, "kp", config.control.kp, "control");
    config.control.kd = Reader::number_or(*it, "kd", config.control.kd, "control");
  }

  if (const auto it = root.find("injectors"); it != root.end()) {
    if (!it->is_array()) throw ConfigError("scenario: 'injectors' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& node = (*it)[i];
      const auto where = "injectors[" + std::to_string(i) + "]";
      reader.keys(node, where, {"name", "target_signal", "fault_type", "event", "effect", "enabled", "chain_to"});
      FaultSpec spec;
      spec.name = Reader::string(node, "name", where);
      spec.target_signal = Reader::string(node, "target_signal", where);
      if (!node.contains("fault_type") || !node.contains("event") || !node.contains("effect")) {
        throw ConfigError(where + ": fault_type, event and effect are required");
      }
      spec.fault_type = reader.fault_type(node["fault_type"], where + ".fault_type");
      spec.event = reader.event(node["event"], where + ".event");
      spec.effect = reader.effect(node["effect"], where + ".effect");
      if (node.contains("enabled")) {
        if (!node["enabled"].is_boolean()) throw ConfigError(where + ".enabled: expected a boolean");
        spec.enabled = node["enabled"].get<bool>();
      }
      if (node.contains("chain_to") && !node["chain_to"].is_null()) {
        spec.chain_to = Reader::string(node, "chain_to", where);
      }
      config.injectors.push_back(std::move(spec));
    }
  }

  if (const auto it = root.find("monitors"); it != root.end()) {
    reader.keys(*it, "monitors", {"signals"});
    if (it->contains("signals")) config.monitored = Reader::strings((*it)["signals"], "monitors.signals");
  }

  if (const auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    config.seed = it->get<std::uint64_t>();
  }

  if (const auto it = root.find("sweep"); it != root.end()) {
    reader.keys(*it, "sweep", {"varied_injectors", "rmse_joint", "consecutive_gap_s"});
    if (it->contains("varied_injectors")) {
      config.sweep.varied_injectors = Reader::strings((*it)["varied_injectors"], "sweep.varied_injectors");
    }
    if (it->contains("rmse_joint")) config.sweep.rmse_joint = Reader::string(*it, "rmse_joint", "sweep");
    config.sweep.consecutive_gap_s =
        Reader::number_or(*it, "consecutive_gap_s", config.sweep.consecutive_gap_s, "sweep");
  }
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto config = parse_scenario(buffer.str(), path.parent_path());
  if (std::filesystem::exists(config.demo_path())) {
    try {
      config.demo = std::make_shared<const DemoTrajectory>(load_demo_csv(config.demo_path().string()));
    } catch (const std::exception&) {
      // Reported by validate_scenario().
    }
  }
  return config;
}

std::string scenario_to_json(const ScenarioConfig& config) {
  json root;
  if (!config.name.empty()) root["name"] = config.name;
  root["clock"] = {{"dt_s", config.clock.dt}, {"t_end_s", config.clock.t_end}};
  root["joints"] = json::array();
  for (const auto& joint : config.joints) {
    root["joints"].push_back({{"name", joint.name},
                              {"inertia_kg_m2", joint.inertia},
                              {"damping_Nm_s_rad", joint.damping},
                              {"rot_min_deg", joint.rot_min * 180.0 / kPi},
                              {"rot_max_deg", joint.rot_max * 180.0 / kPi},
                              {"max_torque_Nm", joint.max_torque},
                              {"max_speed_rpm", joint.max_speed_rpm}});
  }
  json dmp{{"alpha_z", config.dmp.alpha_z},
           {"alpha_s", config.dmp.alpha_s},
           {"n_basis", config.dmp.n_basis},
           {"basis_width", config.dmp.basis_width},
           {"demo_file", config.dmp.demo_file}};
  if (config.dmp.beta_z) dmp["beta_z"] = *config.dmp.beta_z;
  if (config.dmp.tau_s) dmp["tau_s"] = *config.dmp.tau_s;
  root["dmp"] = dmp;
  root["control"] = {{"kp", config.control.kp}, {"kd", config.control.kd}};
  root["injectors"] = json::array();
  for (const auto& spec : config.injectors) {
    json node{{"name", spec.name},
              {"target_signal", spec.target_signal},
              {"fault_type", fault_type_json(spec.fault_type)},
              {"event", event_json(spec.event)},
              {"effect", effect_json(spec.effect)},
              {"enabled", spec.enabled}};
    if (spec.chain_to) node["chain_to"] = *spec.chain_to;
    root["injectors"].push_back(node);
  }
  root["monitors"] = {{"signals", config.monitored}};
  root["seed"] = config.seed;
  root["sweep"] = {{"varied_injectors", config.sweep.varied_injectors},
                   {"rmse_joint", config.sweep.rmse_joint},
                   {"consecutive_gap_s", config.sweep.consecutive_gap_s}};
  return root.dump(2) + "\n";
}

std::vector<std::string> scenario_signals(const ScenarioConfig& config) {
  std::vector<std::string> names;
  for (const char* prefix : {"plant.theta_", "plant.omega_"}) {
    for (const auto& joint : config.joints) names.push_back(prefix + joint.name);
  }
  for (const char* prefix : {"controller.y_ref_", "controller.yd_ref_", "controller.ydd_ref_", "controller.tau_cmd_",
                             "controller.tau_"}) {
    for (const auto& joint : config.joints) names.push_back(prefix + joint.name);
  }
  for (const auto& spec : config.injectors) {
    names.push_back(spec.name + ".out");
    names.push_back(spec.name + ".trigger");
  }
  return names;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& config) {
  std::vector<std::string> issues;
  for (const auto& field : config.unknown_fields) issues.push_back("unknown field " + field);

  if (!(config.clock.dt > 0.0) || !std::isfinite(config.clock.dt)) issues.push_back("clock.dt_s must be > 0");
  if (!(config.clock.t_end >= 0.0) || !std::isfinite(config.clock.t_end)) {
    issues.push_back("clock.t_end_s must be >= 0");
  }
  const double dt = config.clock.dt > 0.0 ? config.clock.dt : 1e-3;

  if (config.joints.empty()) issues.push_back("at least one joint is required");
  std::set<std::string> joint_set;
  for (const auto& joint : config.joints) {
    if (!joint_set.insert(joint.name).second) issues.push_back("duplicate joint '" + joint.name + "'");
    if (!(joint.inertia > 0.0)) issues.push_back("joint '" + joint.name + "': inertia must be > 0");
    if (!(joint.damping >= 0.0)) issues.push_back("joint '" + joint.name + "': damping must be >= 0");
    if (!(joint.rot_min < joint.rot_max)) issues.push_back("joint '" + joint.name + "': rot_min must be < rot_max");
    if (!(joint.max_torque > 0.0)) issues.push_back("joint '" + joint.name + "': max_torque must be > 0");
    if (!(joint.max_speed_rpm > 0.0)) issues.push_back("joint '" + joint.name + "': max_speed must be > 0");
  }

  const auto& dmp = config.dmp;
  if (!(dmp.alpha_z > 0.0)) issues.push_back("dmp.alpha_z must be > 0");
  if (dmp.beta_z && *dmp.beta_z != dmp.alpha_z / 4.0) {
    issues.push_back("dmp.beta_z must equal alpha_z/4 for a critically damped transformation system (got " +
                     format_number(*dmp.beta_z) + ", expected " + format_number(dmp.alpha_z / 4.0) + ")");
  }
  if (!(dmp.alpha_s > 0.0)) issues.push_back("dmp.alpha_s must be > 0");
  if (dmp.n_basis == 0) issues.push_back("dmp.n_basis must be >= 1");
  if (!(dmp.basis_width > 0.0)) issues.push_back("dmp.basis_width must be > 0");
  if (dmp.tau_s && !(*dmp.tau_s > 0.0)) issues.push_back("dmp.tau_s must be > 0");
  if (config.demo) {
    for (const auto& joint : config.joints) {
      if (std::find(config.demo->joints.begin(), config.demo->joints.end(), joint.name) == config.demo->joints.end()) {
        issues.push_back("demonstration has no column for joint '" + joint.name + "'");
      }
    }
  } else if (!std::filesystem::exists(config.demo_path())) {
    issues.push_back("dmp.demo_file not found: " + config.demo_path().string());
  } else {
    try {
      load_demo_csv(config.demo_path().string());
    } catch (const std::exception& e) {
      issues.push_back(std::string("dmp.demo_file invalid: ") + e.what());
    }
  }

  if (!(config.control.kp >= 0.0)) issues.push_back("control.kp must be >= 0");
  if (!(config.control.kd >= 0.0)) issues.push_back("control.kd must be >= 0");

  const auto paths = data_paths(config.joints);
  std::set<std::string> names;
  std::set<std::string> trigger_targets;
  for (const auto& spec : config.injectors) {
    for (auto& issue : check_fault_spec(spec, dt)) issues.push_back(std::move(issue));
    if (spec.name.find('.') != std::string::npos) issues.push_back("injector '" + spec.name + "': name must not contain '.'");
    if (spec.name == "plant" || spec.name == "controller" || spec.name == "monitor") {
      issues.push_back("injector '" + spec.name + "': name is reserved");
    }
    if (!names.insert(spec.name).second) issues.push_back("duplicate injector name '" + spec.name + "'");
    const bool injectable = std::any_of(paths.begin(), paths.end(),
                                        [&](const DataPath& p) { return p.source == spec.target_signal; });
    if (!injectable) {
      issues.push_back("injector '" + spec.name + "': target_signal '" + spec.target_signal +
                       "' is not a plant sensor or actuator signal");
    }
    if (spec.chain_to && *spec.chain_to != spec.name) {
      if (config.find_injector(*spec.chain_to) == nullptr) {
        issues.push_back("injector '" + spec.name + "': chain_to '" + *spec.chain_to + "' does not exist");
      } else if (!trigger_targets.insert(*spec.chain_to).second) {
        issues.push_back("injector '" + *spec.chain_to + "' is chained from more than one injector");
      }
    }
  }

  // Trigger lines are synchronous, so a chain cycle can never be scheduled.
  for (const auto& spec : config.injectors) {
    const FaultSpec* current = &spec;
    for (std::size_t hops = 0; hops < config.injectors.size() && current->chain_to; ++hops) {
      current = config.find_injector(*current->chain_to);
      if (current == nullptr) break;
      if (current == &spec) {
        if (*spec.chain_to != spec.name) issues.push_back("injector '" + spec.name + "' is part of a trigger cycle");
        break;
      }
    }
  }

  const auto signals = scenario_signals(config);
  for (const auto& name : config.monitored) {
    if (std::find(signals.begin(), signals.end(), name) == signals.end()) {
      issues.push_back("monitors.signals: unknown signal '" + name + "'");
    }
  }

  for (const auto& name : config.sweep.varied_injectors) {
    const auto* spec = config.find_injector(name);
    if (spec == nullptr) {
      issues.push_back("sweep.varied_injectors: unknown injector '" + name + "'");
    } else if (!std::holds_alternative<ConstantTime>(spec->effect)) {
      issues.push_back("sweep.varied_injectors: '" + name + "' must use a ConstantTime effect");
    }
  }
  if (!config.sweep.rmse_joint.empty() && joint_set.count(config.sweep.rmse_joint) == 0) {
    issues.push_back("sweep.rmse_joint: unknown joint '" + config.sweep.rmse_joint + "'");
  }
  if (!(config.sweep.consecutive_gap_s >= 0.0)) issues.push_back("sweep.consecutive_gap_s must be >= 0");
  return issues;
}

BlockGraph build_graph(const ScenarioConfig& config) {
  auto demo = config.demo;
  if (!demo) {
    try {
      demo = std::make_shared<const DemoTrajectory>(load_demo_csv(config.demo_path().string()));
    } catch (const std::exception& e) {
      throw WiringError(std::string("cannot load demonstration: ") + e.what());
    }
  }

  const double tau = config.dmp.tau_s.value_or(demo->duration());
  const auto basis = make_basis(config.dmp.n_basis, config.dmp.alpha_s, config.dmp.basis_width);
  std::vector<DmpParams> params;
  std::vector<JointState> initial;
  for (const auto& joint : config.joints) {
    std::span<const double> trajectory;
    try {
      trajectory = demo->joint(joint.name);
    } catch (const std::out_of_range& e) {
      throw WiringError(e.what());
    }
    DmpParams p;
    p.alpha_z = config.dmp.alpha_z;
    p.beta_z = config.dmp.beta_z.value_or(config.dmp.alpha_z / 4.0);
    p.alpha_s = config.dmp.alpha_s;
    p.tau = tau;
    p.basis = basis;
    if (learn_weights(trajectory, demo->dt(), p) == LearnStatus::DegenerateDemo &&
        trajectory.front() != trajectory.back()) {
      std::cerr << "warning: demonstration for joint '" << joint.name
                << "' starts and ends at the same angle; forcing term disabled\n";
    }
    params.push_back(std::move(p));
    initial.push_back({trajectory.front(), 0.0, 0.0});
  }

  BlockGraph graph;
  graph.add(std::make_unique<PlantBlock>("plant", config.joints, std::move(initial)));
  for (const auto& spec : config.injectors) graph.add(std::make_unique<InjectorBlock>(spec, config.clock.dt));
  graph.add(std::make_unique<ControllerBlock>("controller", config.joints,
                                              DmpSystem(std::move(params), config.dmp.alpha_s, tau), config.control));
  graph.add(std::make_unique<MonitorBlock>("monitor", config.joints));

  const auto paths = data_paths(config.joints);
  for (const auto& path : paths) {
    std::string upstream = path.source;
    for (const auto& spec : config.injectors) {
      if (spec.target_signal != path.source) continue;
      graph.connect(upstream, spec.name + ".in");
      upstream = spec.name + ".out";
    }
    graph.connect(upstream, path.sink);
  }
  for (const auto& spec : config.injectors) {
    if (spec.target_signal.empty()) continue;
    const bool known = std::any_of(paths.begin(), paths.end(),
                                   [&](const DataPath& p) { return p.source == spec.target_signal; });
    if (!known) throw WiringError("injector '" + spec.name + "' reads unknown signal '" + spec.target_signal + "'");
  }
  for (const auto& joint : config.joints) {
    graph.connect("plant.theta_" + joint.name, "monitor.theta_" + joint.name);
    graph.connect("plant.omega_" + joint.name, "monitor.omega_" + joint.name);
    graph.connect("controller.tau_cmd_" + joint.name, "monitor.tau_cmd_" + joint.name);
  }
  for (const auto& spec : config.injectors) {
    if (spec.chain_to) graph.connect(spec.name + ".trigger", *spec.chain_to + ".trigger_in");
  }
  graph.set_monitored(config.monitored);
  graph.finalize();
  return graph;
}

}  // namespace faultbench
