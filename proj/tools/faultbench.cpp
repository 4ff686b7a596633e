#include "faultbench/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace faultbench;

  CLI::App app{"Fault-injection test bench for a DMP-controlled exoskeleton model"};
  app.require_subcommand(1);

  GlobalOptions global;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed")->expected(1);
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--quiet", global.quiet, "Only print the verdict");

  std::string path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", path, "Scenario JSON")->required();

  bool disable_faults = false;
  auto* run = app.add_subcommand("run", "Simulate a scenario once");
  run->add_option("scenario", path, "Scenario JSON")->required();
  run->add_flag("--disable-faults", disable_faults, "Run with every injector disabled");

  SweepOptions sweep_options;
  sweep_options.jobs = default_jobs();
  auto* sweep = app.add_subcommand("sweep", "Sweep the fault duration of the varied injectors");
  sweep->add_option("scenario", path, "Scenario JSON")->required();
  auto* preset = sweep->add_option("--preset", sweep_options.preset, "fine | coarse")
                     ->check(CLI::IsMember({"fine", "coarse"}));
  sweep->add_option("--durations", sweep_options.durations, "Explicit durations in seconds")
      ->delimiter(',')
      ->excludes(preset);
  sweep->add_option("--seeds", sweep_options.seeds, "Replicates per duration")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", sweep_options.jobs, "Worker threads (default FAULTBENCH_JOBS or 1)")
      ->check(CLI::PositiveNumber);

  // Global flags are also accepted after the subcommand.
  for (auto* sub : {validate, run, sweep}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (seed_opt->count() > 0) global.seed = seed;
  global.out = out_dir;

  if (validate->parsed()) return cmd_validate(path, global, std::cout, std::cerr);
  if (run->parsed()) return cmd_run(path, global, disable_faults, std::cout, std::cerr);
  return cmd_sweep(path, global, sweep_options, std::cout, std::cerr);
}
