//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/plant/reactor.hpp"

#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace gpmpc::plant {
namespace {

constexpr std::array<std::string_view, kNumStates> kStateNames = {
    "m_W", "m_A", "m_P", "T_R", "T_S", "T_M", "T_EK", "T_AWT", "T_adiab"};
constexpr std::array<std::string_view, kNumControls> kControlNames = {
    "mdot_F", "T_M_in", "T_AWT_in"};
constexpr double kMassClampTolerance = 1e-9;

} // namespace

std::string_view state_name(int index) { return kStateNames.at(index); }
std::string_view control_name(int index) { return kControlNames.at(index); }

void PlantParams::validate() const {
  const std::pair<const char *, double> positive[] = {
      {"k0", k0},
      {"activation_energy", activation_energy},
      {"gas_constant", gas_constant},
      {"k_u1", k_u1},
      {"k_u2", k_u2},
      {"k_ws", k_ws},
      {"k_as", k_as},
      {"k_ps", k_ps},
      {"cp_reactor", cp_reactor},
      {"cp_steel", cp_steel},
      {"cp_water", cp_water},
      {"cp_feed", cp_feed},
      {"surface_area", surface_area},
      {"alpha_heat", alpha_heat},
      {"mass_steel", mass_steel},
      {"mass_exchanger", mass_exchanger},
      {"mass_jacket_coolant", mass_jacket_coolant},
      {"mass_exchanger_coolant", mass_exchanger_coolant},
      {"flow_jacket_coolant", flow_jacket_coolant},
      {"flow_exchanger_coolant", flow_exchanger_coolant},
      {"flow_exchanger", flow_exchanger},
      {"feed_temperature", feed_temperature},
      {"feed_water_fraction", feed_water_fraction},
      {"feed_monomer_fraction", feed_monomer_fraction},
      {"p1", p1},
  };
  for (const auto &[name, value] : positive)
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument(
          fmt::format("plant parameter '{}' must be positive, got {}", name, value));
  if (!std::isfinite(reaction_enthalpy))
    throw std::invalid_argument("plant parameter 'reaction_enthalpy' must be finite");
  if (feed_water_fraction + feed_monomer_fraction > 1.0 + 1e-12)
    throw std::invalid_argument("feed mass fractions sum to more than one");
}

void ConstraintSpec::validate() const {
  if (!(band > 0.0) || !(setpoint > 0.0) || !(adiabatic_max > 0.0) ||
      !(batch_duration_h > 0.0))
    throw std::invalid_argument("constraint spec fields must be positive");
}

StateVector rhs(const StateVector &state, const ControlVector &u,
                const PlantParams &params) {
  StateVector dx = reactor_rhs<double>(state, u, params);
  if (!dx.allFinite())
    throw NonFiniteState("reactor rhs: non-finite derivative");
  return dx;
}

StateVector step(const StateVector &state, const ControlVector &u,
                 const PlantParams &params, const Integration &integration) {
  if (!(integration.dt_s > 0.0) || integration.substeps < 1)
    throw std::invalid_argument("step: dt must be positive and substeps >= 1");
  auto f = [&params](const StateVector &x, const ControlVector &v) {
    return rhs(x, v, params);
  };
  StateVector next = rk4_interval<double>(f, state, u, integration.dt_hours(),
                                          integration.substeps);
  if (!next.allFinite())
    throw NonFiniteState("reactor step: non-finite state");
  for (int i = kMassWater; i <= kMassPolymer; ++i) {
    if (next[i] < 0.0 && next[i] >= -kMassClampTolerance) {
      spdlog::warn("clamping {} = {:.3e} kg to zero", state_name(i), next[i]);
      next[i] = 0.0;
    }
  }
  return next;
}

StateVector measure(const StateVector &state, const NoiseSpec &noise,
                    numerics::RngStream &rng) {
  StateVector y = state;
  for (int i = 0; i < kNumStates; ++i) {
    const double sigma =
        is_mass_state(i) ? noise.sigma_mass : noise.sigma_temperature;
    const double draw = rng.normal();
    y[i] += sigma * draw;
  }
  return y;
}

ViolationVector violation(const StateVector &state, const ConstraintSpec &spec) {
  const double t_r = state[kTempReactor];
  ViolationVector v;
  v[0] = std::max(0.0, t_r - (spec.setpoint + spec.band));
  v[1] = std::max(0.0, (spec.setpoint - spec.band) - t_r);
  v[2] = std::max(0.0, state[kTempAdiabatic] - spec.adiabatic_max);
  return v;
}

} // namespace gpmpc::plant
