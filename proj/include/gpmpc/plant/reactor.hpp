//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

#include "gpmpc/numerics/rng.hpp"

namespace gpmpc::plant {

inline constexpr int kNumStates = 9;
inline constexpr int kNumControls = 3;
inline constexpr int kNumConstraints = 3;

/// Positions inside a state vector. Masses in kg, temperatures in degC.
enum StateIndex : int {
  kMassWater = 0,
  kMassMonomer,
  kMassPolymer,
  kTempReactor,
  kTempVessel,
  kTempJacket,
  kTempExchanger,
  kTempExchangerCoolant,
  kTempAdiabatic,
};

/// Feed rate in kg/h, inlet temperatures in degC.
enum ControlIndex : int {
  kFeedRate = 0,
  kJacketInletTemp,
  kExchangerInletTemp,
};

using StateVector = Eigen::Matrix<double, kNumStates, 1>;
using ControlVector = Eigen::Matrix<double, kNumControls, 1>;
using ViolationVector = Eigen::Matrix<double, kNumConstraints, 1>;

std::string_view state_name(int index);
std::string_view control_name(int index);
inline bool is_mass_state(int index) { return index <= kMassPolymer; }

class NonFiniteState : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reactor model constants. Time unit is the hour, energy unit the kJ.
struct PlantParams {
  double k0 = 0.0;            ///< reaction rate constant [1/h]
  double activation_energy = 0.0; ///< E_a [kJ/kmol]
  double gas_constant = 0.0;  ///< R [kJ/(kmol K)]
  double k_u1 = 0.0;          ///< conversion weight, unreacted
  double k_u2 = 0.0;          ///< conversion weight, reacted
  double k_ws = 0.0;          ///< heat transfer water-steel [kJ/(h m2 K)]
  double k_as = 0.0;          ///< heat transfer monomer-steel [kJ/(h m2 K)]
  double k_ps = 0.0;          ///< heat transfer polymer-steel [kJ/(h m2 K)]
  double cp_reactor = 0.0;    ///< [kJ/(kg K)]
  double cp_steel = 0.0;
  double cp_water = 0.0;
  double cp_feed = 0.0;
  double reaction_enthalpy = 0.0; ///< Delta H_R [kJ/kg]
  double surface_area = 0.0;  ///< jacket area A [m2]
  double alpha_heat = 0.0;    ///< exchanger heat transfer [kJ/(h K)]
  double mass_steel = 0.0;    ///< m_S [kg]
  double mass_exchanger = 0.0; ///< m_AWT, product hold-up in exchanger [kg]
  double mass_jacket_coolant = 0.0; ///< m_M,KW [kg]
  double mass_exchanger_coolant = 0.0; ///< m_AWT,KW [kg]
  double flow_jacket_coolant = 0.0; ///< mdot_M,KW [kg/h]
  double flow_exchanger_coolant = 0.0; ///< mdot_AWT,KW [kg/h]
  double flow_exchanger = 0.0; ///< mdot_AWT, product loop flow [kg/h]
  double feed_temperature = 0.0; ///< T_F [degC]
  double feed_water_fraction = 0.0; ///< omega_W,F
  double feed_monomer_fraction = 0.0; ///< omega_A,F
  double p1 = 0.0;

  /// Throws std::invalid_argument when a field violates its invariant.
  void validate() const;
};

struct NoiseSpec {
  double sigma_temperature = 0.1; ///< [degC]
  double sigma_mass = 33.0;       ///< [kg]
};

struct ConstraintSpec {
  double setpoint = 90.0;       ///< T_set [degC]
  double band = 2.0;            ///< +- band around T_set [degC]
  double adiabatic_max = 109.0; ///< [degC]
  double batch_duration_h = 2.0;

  void validate() const;
};

struct ControlBounds {
  ControlVector lower;
  ControlVector upper;

  ControlVector clamp(const ControlVector &u) const {
    return u.cwiseMax(lower).cwiseMin(upper);
  }
};

/// Reactor right-hand side, generic in the scalar type so the
/// same code yields exact Jacobians through forward-mode automatic
/// differentiation.
template <typename Scalar>
Eigen::Matrix<Scalar, kNumStates, 1>
reactor_rhs(const Eigen::Matrix<Scalar, kNumStates, 1> &x,
            const Eigen::Matrix<Scalar, kNumControls, 1> &u,
            const PlantParams &p) {
  using std::exp;
  const Scalar &m_w = x[kMassWater];
  const Scalar &m_a = x[kMassMonomer];
  const Scalar &m_p = x[kMassPolymer];
  const Scalar &t_r = x[kTempReactor];
  const Scalar &t_s = x[kTempVessel];
  const Scalar &t_m = x[kTempJacket];
  const Scalar &t_ek = x[kTempExchanger];
  const Scalar &t_awt = x[kTempExchangerCoolant];
  const Scalar &feed = u[kFeedRate];
  const Scalar &t_m_in = u[kJacketInletTemp];
  const Scalar &t_awt_in = u[kExchangerInletTemp];

  const Scalar conversion = m_p / (m_a + m_p);
  const Scalar m_total = m_w + m_a + m_p;
  const Scalar rate_mix =
      p.k_u1 * (Scalar(1.0) - conversion) + p.k_u2 * conversion;
  const Scalar k_r1 =
      p.k0 * exp(-p.activation_energy / (p.gas_constant * (t_r + 273.15))) *
      rate_mix;
  const Scalar k_r2 =
      p.k0 * exp(-p.activation_energy / (p.gas_constant * (t_ek + 273.15))) *
      rate_mix;
  const Scalar k_k =
      (m_w * p.k_ws + m_a * p.k_as + m_p * p.k_ps) / m_total;
  const Scalar m_a_reactor = m_a - m_a * p.mass_exchanger / m_total;
  const Scalar exchanger_reaction = k_r2 * p.mass_exchanger * m_a / m_total;

  Eigen::Matrix<Scalar, kNumStates, 1> dx;
  dx[kMassWater] = feed * p.feed_water_fraction;
  dx[kMassMonomer] = feed * p.feed_monomer_fraction - k_r1 * m_a_reactor -
                     exchanger_reaction;
  dx[kMassPolymer] = k_r1 * m_a_reactor + p.p1 * exchanger_reaction;
  dx[kTempReactor] =
      (feed * p.cp_feed * (p.feed_temperature - t_r) +
       p.reaction_enthalpy * k_r1 * m_a_reactor -
       k_k * p.surface_area * (t_r - t_s) -
       p.flow_exchanger * p.cp_reactor * (t_r - t_ek)) /
      (p.cp_reactor * m_total);
  dx[kTempVessel] = (k_k * p.surface_area * (t_r - t_s) -
                     k_k * p.surface_area * (t_s - t_m)) /
                    (p.cp_steel * p.mass_steel);
  dx[kTempJacket] =
      (p.flow_jacket_coolant * p.cp_water * (t_m_in - t_m) +
       k_k * p.surface_area * (t_s - t_m)) /
      (p.cp_water * p.mass_jacket_coolant);
  dx[kTempExchanger] =
      (p.flow_exchanger * p.cp_water * (t_r - t_ek) -
       p.alpha_heat * (t_ek - t_awt) +
       k_r2 * m_a * p.mass_exchanger * p.reaction_enthalpy / m_total) /
      (p.cp_reactor * p.mass_exchanger);
  dx[kTempExchangerCoolant] =
      (p.flow_exchanger_coolant * p.cp_water * (t_awt_in - t_awt) -
       p.alpha_heat * (t_awt - t_ek)) /
      (p.cp_water * p.mass_exchanger_coolant);
  dx[kTempAdiabatic] =
      p.reaction_enthalpy / (m_total * p.cp_reactor) * dx[kMassMonomer] -
      (dx[kMassWater] + dx[kMassMonomer] + dx[kMassPolymer]) *
          (m_a * p.reaction_enthalpy / (m_total * m_total * p.cp_reactor)) +
      dx[kTempReactor];
  return dx;
}

/// Time derivatives of all states. Throws NonFiniteState when any derivative
/// is not finite (e.g. an empty reactor).
StateVector rhs(const StateVector &state, const ControlVector &u,
                const PlantParams &params);

/// Classical RK4 over one zero-order-hold interval of `dt_s` seconds split
/// into `substeps` equal internal steps.
template <typename Scalar, typename Rhs>
Eigen::Matrix<Scalar, kNumStates, 1>
rk4_interval(const Rhs &f, Eigen::Matrix<Scalar, kNumStates, 1> x,
             const Eigen::Matrix<Scalar, kNumControls, 1> &u, double dt_h,
             int substeps) {
  const double h = dt_h / substeps;
  for (int k = 0; k < substeps; ++k) {
    const auto k1 = f(x, u);
    const auto k2 = f(Eigen::Matrix<Scalar, kNumStates, 1>(x + (0.5 * h) * k1), u);
    const auto k3 = f(Eigen::Matrix<Scalar, kNumStates, 1>(x + (0.5 * h) * k2), u);
    const auto k4 = f(Eigen::Matrix<Scalar, kNumStates, 1>(x + h * k3), u);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

struct Integration {
  double dt_s = 50.0;
  int substeps = 50;

  double dt_hours() const { return dt_s / 3600.0; }
};

/// Advances the reactor by one control interval. Masses that land in
/// [-1e-9, 0) are clamped to zero; anything more negative is left for the
/// caller to detect.
StateVector step(const StateVector &state, const ControlVector &u,
                 const PlantParams &params, const Integration &integration);

/// Adds i.i.d. Gaussian measurement noise (sigma_mass on masses,
/// sigma_temperature on temperatures).
StateVector measure(const StateVector &state, const NoiseSpec &noise,
                    numerics::RngStream &rng);

/// (T_R above band, T_R below band, T_adiab above limit), all >= 0 in degC.
ViolationVector violation(const StateVector &state, const ConstraintSpec &spec);

} // namespace gpmpc::plant
