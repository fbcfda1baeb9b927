//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "gpmpc/controller/ocp.hpp"
#include "gpmpc/plant/config.hpp"

namespace gpmpc::controller {

struct ReactorOcpSettings {
  int horizon = 12;
  double terminal_weight = 1.0;
  double penalty_weight = 1000.0;
  double epsilon = 0.95;
  SolverOptions solver;
};

/// Reactor-temperature band and adiabatic-temperature limit as soft
/// constraints: T_R <= T_set + band, -T_R <= -(T_set - band), T_adiab <= max.
std::vector<LinearConstraint> reactor_constraints(const plant::ConstraintSpec &spec);

/// OCP for the reactor: tracking T_R to T_set or maximizing m_P.
OcpSpec make_reactor_ocp(const plant::PlantConfig &config, ObjectiveKind objective,
                         ChanceMode mode, const ReactorOcpSettings &settings = {});

} // namespace gpmpc::controller
