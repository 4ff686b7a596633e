#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "faultbench/experiments.hpp"
#include "faultbench/scenario.hpp"

#include <json.hpp>

#include <algorithm>

using namespace faultbench;
using nlohmann::json;

namespace {

const std::string kData = FAULTBENCH_DATA_DIR;

json case_json() {
  std::ifstream in(kData + "/case_study.json");
  return json::parse(in);
}

ScenarioConfig parse(const json& root) { return parse_scenario(root.dump(), kData); }

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("shipped scenarios parse and validate") {
  const auto cs = load_scenario(kData + "/case_study.json");
  CHECK(validate_scenario(cs).empty());
  CHECK(cs.joints.size() == 6);
  CHECK(cs.clock.dt == 1e-3);
  CHECK(cs.clock.t_end == 7.0);
  REQUIRE(cs.injectors.size() == 2);
  const auto& a = cs.injectors[0];
  const auto& b = cs.injectors[1];
  CHECK(a.target_signal == "plant.theta_knee_r");
  CHECK(std::holds_alternative<StuckAt>(a.fault_type));
  CHECK(std::get<FailureProbability>(a.event).p == 0.0005);
  CHECK(a.chain_to == b.name);
  CHECK(b.target_signal == "plant.omega_knee_r");
  CHECK(std::get<PackageDrop>(b.fault_type).replacement == 0.0);
  CHECK(std::get<ConstantTime>(a.effect).duration == std::get<ConstantTime>(b.effect).duration);
  REQUIRE(cs.demo);

  const auto minimal = load_scenario(kData + "/minimal.json");
  CHECK(validate_scenario(minimal).empty());
  CHECK(minimal.joints.size() == 1);
  CHECK(minimal.injectors.empty());
}

TEST_CASE("minimal scenario builds a three-node graph") {
  const auto graph = build_graph(load_scenario(kData + "/minimal.json"));
  REQUIRE(graph.size() == 3);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < graph.size(); ++i) names.push_back(graph.block(i).name());
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"controller", "monitor", "plant"});
}

TEST_CASE("case study wires injector A's trigger into injector B") {
  auto config = load_scenario(kData + "/case_study.json");
  auto graph = build_graph(config);
  CHECK(graph.size() == 5);
  // Force frequent activations and compare trigger traces.
  config.injectors[0].event = FailureProbability{0.01};
  config.monitored = {"knee_pos_stuck.trigger", "knee_vel_zero.trigger", "knee_vel_zero.out",
                      "knee_pos_stuck.out", "plant.theta_knee_r"};
  const auto outcome = run_scenario(config, 3);
  const auto ta = outcome.trace.column("knee_pos_stuck.trigger");
  const auto tb = outcome.trace.column("knee_vel_zero.trigger");
  CHECK(std::count(ta.begin(), ta.end(), 1.0) > 0);
  CHECK(std::equal(ta.begin(), ta.end(), tb.begin(), tb.end()));
  const auto vel = outcome.trace.column("knee_vel_zero.out");
  const auto pos = outcome.trace.column("knee_pos_stuck.out");
  const auto theta = outcome.trace.column("plant.theta_knee_r");
  for (std::size_t k = 1; k < ta.size(); ++k) {
    if (tb[k] == 1.0) REQUIRE(vel[k] == 0.0);
    if (ta[k] == 0.0) REQUIRE(pos[k] == theta[k]);
  }
}

TEST_CASE("injectors on one signal chain in declaration order") {
  auto root = case_json();
  root["injectors"] = json::array();
  for (const auto& [name, offset] : {std::pair{"first", 0.25}, std::pair{"second", -1.0}}) {
    root["injectors"].push_back({{"name", name},
                                 {"target_signal", "controller.tau_hip_l"},
                                 {"fault_type", {{"kind", "Bias"}, {"offset", offset}}},
                                 {"event", {{"kind", "FailureProbability"}, {"p", 1.0}}},
                                 {"effect", {{"kind", "InfiniteTime"}}}});
  }
  root["monitors"]["signals"] = {"controller.tau_hip_l", "first.out", "second.out"};
  root.erase("sweep");
  auto config = parse(root);
  REQUIRE(validate_scenario(config).empty());
  config.clock.t_end = 0.2;
  const auto outcome = run_scenario(config, 1);
  const auto tau = outcome.trace.column("controller.tau_hip_l");
  const auto first = outcome.trace.column("first.out");
  const auto second = outcome.trace.column("second.out");
  for (std::size_t k = 0; k < tau.size(); ++k) {
    REQUIRE(first[k] == tau[k] + 0.25);
    REQUIRE(second[k] == first[k] - 1.0);
  }
}

TEST_CASE("unknown target signal") {
  auto root = case_json();
  root["injectors"][1]["target_signal"] = "plant.theta_elbow";
  const auto config = parse(root);
  CHECK(mentions(validate_scenario(config), "plant.theta_elbow"));
  CHECK_THROWS_AS(build_graph(config), WiringError);
}

TEST_CASE("semantic violations are all reported") {
  SUBCASE("self chain") {
    auto root = case_json();
    root["injectors"][1]["chain_to"] = "knee_vel_zero";
    CHECK(mentions(validate_scenario(parse(root)), "itself"));
  }
  SUBCASE("missing chain target") {
    auto root = case_json();
    root["injectors"][0]["chain_to"] = "ghost";
    CHECK(mentions(validate_scenario(parse(root)), "ghost"));
  }
  SUBCASE("trigger cycle") {
    auto root = case_json();
    root["injectors"][1]["chain_to"] = "knee_pos_stuck";
    const auto issues = validate_scenario(parse(root));
    CHECK(mentions(issues, "trigger cycle"));
  }
  SUBCASE("beta_z must stay critically damped") {
    auto root = case_json();
    root["dmp"]["beta_z"] = 7.0;
    const auto issues = validate_scenario(parse(root));
    REQUIRE(issues.size() == 1);
    CHECK(mentions(issues, "critically damped"));
    CHECK(mentions(issues, "alpha_z/4"));
    root["dmp"]["beta_z"] = 6.25;
    CHECK(validate_scenario(parse(root)).empty());
  }
  SUBCASE("unknown fields") {
    auto root = case_json();
    root["clock"]["dt_ms"] = 1;
    root["injectors"][0]["colour"] = "red";
    const auto issues = validate_scenario(parse(root));
    CHECK(mentions(issues, "dt_ms"));
    CHECK(mentions(issues, "colour"));
  }
  SUBCASE("bad numbers and several problems at once") {
    auto root = case_json();
    root["clock"]["dt_s"] = 0.0;
    root["injectors"][0]["event"]["p"] = 2.0;
    root["joints"][0]["rot_min_deg"] = 100.0;
    root["dmp"]["demo_file"] = "nope.csv";
    const auto issues = validate_scenario(parse(root));
    CHECK(issues.size() >= 4);
    CHECK(mentions(issues, "dt_s"));
    CHECK(mentions(issues, "probability"));
    CHECK(mentions(issues, "rot_min"));
    CHECK(mentions(issues, "nope.csv"));
  }
  SUBCASE("unknown monitored signal") {
    auto root = case_json();
    root["monitors"]["signals"].push_back("plant.nothing");
    CHECK(mentions(validate_scenario(parse(root)), "plant.nothing"));
  }
}

TEST_CASE("malformed text is a ConfigError") {
  CHECK_THROWS_AS(parse_scenario("{ not json", kData), ConfigError);
  auto root = case_json();
  root["injectors"][0]["fault_type"]["kind"] = "Gremlin";
  CHECK_THROWS_AS(parse(root), ConfigError);
  root = case_json();
  root["joints"][0]["name"] = "elbow_l";
  CHECK_THROWS_AS(parse(root), ConfigError);
  root = case_json();
  root["clock"]["dt_s"] = "fast";
  CHECK_THROWS_AS(parse(root), ConfigError);
  CHECK_THROWS_AS(load_scenario(kData + "/does_not_exist.json"), ConfigError);
}

TEST_CASE("every fault kind survives a JSON round trip") {
  auto root = case_json();
  const json types[] = {
      {{"kind", "StuckAt"}},
      {{"kind", "PackageDrop"}, {"replacement", 0.5}},
      {{"kind", "Bias"}, {"offset", -0.1}},
      {{"kind", "Noise"}, {"boundary_pct", 5.0}},
      {{"kind", "TimeDelay"}, {"delay_s", 0.02}},
      {{"kind", "BitFlip"}, {"n_bits", 2}, {"bit_positions", {3, 60}}},
      {{"kind", "BitFlip"}, {"n_bits", 1}, {"bit_positions", "random"}, {"random_range", {0, 51}}},
  };
  const json events[] = {{{"kind", "FailureProbability"}, {"p", 0.01}},
                         {{"kind", "MeanTimeToFailure"}, {"mttf_s", 1.0}, {"sigma_s", 0.1}}};
  const json effects[] = {{{"kind", "Once"}},
                          {{"kind", "ConstantTime"}, {"duration_s", 0.1}},
                          {{"kind", "InfiniteTime"}},
                          {{"kind", "MeanTimeToRepair"}, {"mttr_s", 0.2}, {"sigma_s", 0.0}}};
  root["injectors"] = json::array();
  int i = 0;
  for (const auto& t : types) {
    for (const auto& e : events) {
      for (const auto& f : effects) {
        root["injectors"].push_back({{"name", "f" + std::to_string(i++)},
                                     {"target_signal", "plant.omega_ankle_l"},
                                     {"fault_type", t},
                                     {"event", e},
                                     {"effect", f},
                                     {"enabled", i % 2 == 0}});
      }
    }
  }
  root.erase("sweep");
  const auto config = parse(root);
  CHECK(validate_scenario(config).empty());
  const auto text = scenario_to_json(config);
  const auto again = parse_scenario(text, kData);
  CHECK(scenario_to_json(again) == text);
  REQUIRE(again.injectors.size() == config.injectors.size());
  for (std::size_t k = 0; k < config.injectors.size(); ++k) {
    CHECK(fault_type_name(again.injectors[k].fault_type) == std::string(fault_type_name(config.injectors[k].fault_type)));
    CHECK(again.injectors[k].enabled == config.injectors[k].enabled);
  }
  // The whole set also runs.
  auto short_run = config;
  short_run.clock.t_end = 0.5;
  CHECK_NOTHROW(run_scenario(short_run, 9));
}

TEST_CASE("scenario signal list matches the built graph") {
  const auto config = load_scenario(kData + "/case_study.json");
  const auto graph = build_graph(config);
  for (const auto& name : scenario_signals(config)) CHECK(graph.has_signal(name));
  CHECK(scenario_signals(config).size() == graph.signal_names().size());
}

TEST_CASE("initial plant state starts on the demonstration") {
  auto config = load_scenario(kData + "/case_study.json");
  config.monitored = {"plant.theta_knee_r", "controller.y_ref_knee_r"};
  config.clock.t_end = 0.01;
  const auto outcome = run_scenario(config, 1, true);
  CHECK(outcome.trace.column("plant.theta_knee_r")[0] == config.demo->joint("knee_r")[0]);
  CHECK(outcome.trace.column("controller.y_ref_knee_r")[0] == config.demo->joint("knee_r")[0]);
}
