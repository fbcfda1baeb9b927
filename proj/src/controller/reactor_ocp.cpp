//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/controller/reactor_ocp.hpp"

namespace gpmpc::controller {

std::vector<LinearConstraint> reactor_constraints(const plant::ConstraintSpec &spec) {
  spec.validate();
  const Vector t_r = Vector::Unit(plant::kNumStates, plant::kTempReactor);
  const Vector t_ad = Vector::Unit(plant::kNumStates, plant::kTempAdiabatic);
  return {{t_r, spec.setpoint + spec.band},
          {-t_r, -(spec.setpoint - spec.band)},
          {t_ad, spec.adiabatic_max}};
}

OcpSpec make_reactor_ocp(const plant::PlantConfig &config, ObjectiveKind objective,
                         ChanceMode mode, const ReactorOcpSettings &settings) {
  OcpSpec spec;
  spec.horizon = settings.horizon;
  spec.objective.kind = objective;
  if (objective == ObjectiveKind::kTracking) {
    spec.objective.state_index = plant::kTempReactor;
    spec.objective.setpoint = config.constraints.setpoint;
  } else {
    spec.objective.state_index = plant::kMassPolymer;
  }
  spec.terminal_weight = settings.terminal_weight;
  spec.penalty_weight = settings.penalty_weight;
  spec.epsilon = settings.epsilon;
  spec.chance_mode = mode;
  spec.constraints = reactor_constraints(config.constraints);
  spec.control_lower = config.bounds.lower;
  spec.control_upper = config.bounds.upper;
  spec.solver = settings.solver;
  spec.validate(plant::kNumStates, plant::kNumControls);
  return spec;
}

} // namespace gpmpc::controller
