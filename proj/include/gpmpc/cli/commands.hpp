//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "gpmpc/cli/experiment.hpp"

namespace gpmpc::cli {

struct RunOptions {
  std::filesystem::path out;              ///< overrides output_dir when set
  int jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

/// Layout of a run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.yaml"; }
  std::filesystem::path metrics() const { return root / "metrics.json"; }
  std::filesystem::path seed_dir(std::uint64_t seed) const;
  std::filesystem::path trajectory(std::uint64_t seed, int batch) const;
  std::filesystem::path model(std::uint64_t seed, int batch) const;
  std::filesystem::path solver_log(std::uint64_t seed, int batch) const;
  std::filesystem::path benchmark_trajectory(std::uint64_t seed, const std::string &which) const;
  std::filesystem::path benchmark_metrics(const std::string &which) const;
};

/// Learning loop over all seeds. Writes the manifest first, then per-batch
/// trajectories, models and solver logs as they finish, then metrics.json.
/// Returns 0 when every seed succeeded, 1 otherwise (partial results kept).
int cmd_run(ExperimentConfig config, const RunOptions &options, std::ostream &err);

/// Single-batch benchmark per seed; `which` is "pi" or "full-model".
/// Returns 2 for an unknown `which`.
int cmd_benchmark(ExperimentConfig config, const std::string &which, const RunOptions &options,
                  std::ostream &err);

/// Re-runs every logged GP-MPC batch of a run directory from its saved
/// models and measurements and compares the controls bit for bit.
int cmd_replay(const std::filesystem::path &manifest, std::ostream &out, std::ostream &err);

} // namespace gpmpc::cli
