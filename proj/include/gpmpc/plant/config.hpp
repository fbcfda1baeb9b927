//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "gpmpc/plant/reactor.hpp"

namespace YAML {
class Node;
}

namespace gpmpc::plant {

/// Everything needed to simulate one batch of the reactor.
struct PlantConfig {
  PlantParams params;
  StateVector initial_state;
  ControlBounds bounds;
  ControlVector nominal_controls;
  NoiseSpec noise;
  ConstraintSpec constraints;
  Integration integration;

  /// Number of control intervals in one batch.
  int steps_per_batch() const;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

PlantConfig load_plant_config(const std::filesystem::path &path);
PlantConfig parse_plant_config(const YAML::Node &root, const std::string &origin);

/// Adiabatic end temperature of a state: T_R + m_A * dH / (m_total * c_p,R).
double adiabatic_temperature(const StateVector &state, const PlantParams &params);

} // namespace gpmpc::plant
