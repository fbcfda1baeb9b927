//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gpmpc/learner/learning.hpp"

namespace gpmpc::cli {

/// One experiment family (objective x chance mode) over a list of seeds.
/// Paths are absolute once parsed.
struct ExperimentConfig {
  std::filesystem::path plant_config;
  controller::ObjectiveKind objective = controller::ObjectiveKind::kTracking;
  bool chance = true;
  int num_batches = 10;
  std::uint64_t master_seed = 2026;
  std::vector<std::uint64_t> seeds{0};
  learner::InitialGuess initial_guess = learner::InitialGuess::kNominal;

  double pi_k_p = 114.0;
  double pi_k_i = 0.3;

  int horizon = 12;
  double terminal_weight = 1.0;
  double penalty_weight = 1000.0;
  double epsilon = 0.95;

  int solver_max_iterations = 100;
  double solver_tolerance = 1e-6;
  double solver_relative_decrease = 1e-10;
  controller::GradientMode gradient = controller::GradientMode::kAdjoint;
  double fd_step = 1e-6;
  double penalty_smoothing = 1e-4;

  int gp_num_inducing = 20;
  int gp_restarts = 3;
  int gp_max_iterations = 200;
  double gp_tolerance = 1e-5;
  double gp_initial_signal_variance = 1.0;
  double gp_initial_sq_lengthscale = 1.0;
  double gp_initial_noise_variance = 1e-2;
  double constant_control_scale = 1.0;
  double constant_control_spread = 0.01;

  std::filesystem::path output_dir;

  bool operator==(const ExperimentConfig &) const = default;
};

/// Parse error carrying "<file>:<line>: <problem>: field '<name>'".
class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reads an experiment file. Relative paths resolve against its directory.
ExperimentConfig load_experiment(const std::filesystem::path &path);
ExperimentConfig parse_experiment(const std::string &text, const std::string &origin,
                                  const std::filesystem::path &base_dir);

/// YAML text that parses back to an equal config.
std::string experiment_to_yaml(const ExperimentConfig &config);

/// Learner settings with the plant file loaded.
learner::LearningConfig to_learning_config(const ExperimentConfig &config);

} // namespace gpmpc::cli
