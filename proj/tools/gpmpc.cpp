//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "gpmpc/cli/commands.hpp"

int main(int argc, char **argv) {
  using namespace gpmpc::cli;
  CLI::App app{"Batch-to-batch learning GP model predictive control of a polymerization reactor"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::filesystem::path config_path, manifest_path;
  RunOptions options;
  std::uint64_t seed_override = 0;
  std::string which;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--config", config_path, "experiment YAML")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", options.out, "output directory (overrides output_dir)");
    cmd->add_option("--jobs", options.jobs, "seeds run in parallel")->check(CLI::PositiveNumber);
    cmd->add_option("--seed-override", seed_override, "run this single seed instead");
  };

  auto *run = app.add_subcommand("run", "learning loop over all seeds");
  add_common(run);
  auto *bench = app.add_subcommand("benchmark", "single-batch PI or full-model MPC benchmark");
  add_common(bench);
  bench->add_option("--which", which, "pi or full-model")->required();
  auto *replay = app.add_subcommand("replay", "re-execute logged controller decisions");
  replay->add_option("--manifest,manifest", manifest_path, "manifest.yaml of a run")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    for (auto *cmd : {run, bench})
      if (cmd->parsed() && cmd->count("--seed-override"))
        options.seed_override = seed_override;
    if (run->parsed())
      return cmd_run(load_experiment(config_path), options, std::cerr);
    if (bench->parsed())
      return cmd_benchmark(load_experiment(config_path), which, options, std::cerr);
    return cmd_replay(manifest_path, std::cout, std::cerr);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
