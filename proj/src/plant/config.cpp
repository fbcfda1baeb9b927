//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/plant/config.hpp"

#include <cmath>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace gpmpc::plant {
namespace {

class Reader {
public:
  Reader(const YAML::Node &node, std::string path, const std::string &origin)
      : node_(node), path_(std::move(path)), origin_(origin) {}

  Reader section(const std::string &key) const {
    const YAML::Node child = node_[key];
    if (!child || !child.IsMap())
      fail(key, "missing section");
    return Reader(child, path_.empty() ? key : path_ + "." + key, origin_);
  }

  double number(const std::string &key) const {
    const YAML::Node child = node_[key];
    if (!child)
      fail(key, "missing field");
    try {
      return child.as<double>();
    } catch (const YAML::Exception &) {
      fail(key, "expected a number", child.Mark().line + 1);
    }
  }

  double number_or(const std::string &key, double fallback) const {
    return node_[key] ? number(key) : fallback;
  }

  bool has(const std::string &key) const { return static_cast<bool>(node_[key]); }

  [[noreturn]] void fail(const std::string &key, const std::string &what,
                         int line = -1) const {
    if (line < 0)
      line = node_.Mark().line + 1;
    throw ConfigError(fmt::format("{}:{}: {}: field '{}'", origin_, line, what,
                                  path_.empty() ? key : path_ + "." + key));
  }

private:
  YAML::Node node_;
  std::string path_;
  const std::string &origin_;
};

} // namespace

int PlantConfig::steps_per_batch() const {
  return static_cast<int>(
      std::lround(constraints.batch_duration_h * 3600.0 / integration.dt_s));
}

double adiabatic_temperature(const StateVector &state, const PlantParams &params) {
  const double m_total =
      state[kMassWater] + state[kMassMonomer] + state[kMassPolymer];
  return state[kTempReactor] + state[kMassMonomer] * params.reaction_enthalpy /
                                   (m_total * params.cp_reactor);
}

PlantConfig parse_plant_config(const YAML::Node &root, const std::string &origin) {
  const Reader top(root, "", origin);
  PlantConfig cfg;

  const Reader p = top.section("parameters");
  PlantParams &pp = cfg.params;
  pp.k0 = p.number("k0_per_h");
  pp.activation_energy = p.number("activation_energy_kJ_per_kmol");
  pp.gas_constant = p.number("gas_constant_kJ_per_kmol_K");
  pp.k_u1 = p.number("k_U1");
  pp.k_u2 = p.number("k_U2");
  pp.k_ws = p.number("k_WS_kJ_per_h_m2_K");
  pp.k_as = p.number("k_AS_kJ_per_h_m2_K");
  pp.k_ps = p.number("k_PS_kJ_per_h_m2_K");
  pp.cp_reactor = p.number("cp_R_kJ_per_kg_K");
  pp.cp_steel = p.number("cp_S_kJ_per_kg_K");
  pp.cp_water = p.number("cp_W_kJ_per_kg_K");
  pp.cp_feed = p.number("cp_F_kJ_per_kg_K");
  pp.reaction_enthalpy = p.number("delta_H_R_kJ_per_kg");
  pp.surface_area = p.number("A_m2");
  pp.alpha_heat = p.number("alpha_heat_kJ_per_h_K");
  pp.mass_steel = p.number("m_S_kg");
  pp.mass_exchanger = p.number("m_AWT_kg");
  pp.mass_jacket_coolant = p.number("m_M_KW_kg");
  pp.mass_exchanger_coolant = p.number("m_AWT_KW_kg");
  pp.flow_jacket_coolant = p.number("mdot_M_KW_kg_per_h");
  pp.flow_exchanger_coolant = p.number("mdot_AWT_KW_kg_per_h");
  pp.flow_exchanger = p.number("mdot_AWT_kg_per_h");
  pp.feed_temperature = p.number("T_F_degC");
  pp.feed_water_fraction = p.number("omega_W_F");
  pp.feed_monomer_fraction = p.number("omega_A_F");
  pp.p1 = p.number("p1");
  try {
    pp.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }

  const Reader x0 = top.section("initial_state");
  StateVector &s = cfg.initial_state;
  s[kMassWater] = x0.number("m_W_kg");
  s[kMassMonomer] = x0.number("m_A_kg");
  s[kMassPolymer] = x0.number("m_P_kg");
  s[kTempReactor] = x0.number("T_R_degC");
  s[kTempVessel] = x0.number("T_S_degC");
  s[kTempJacket] = x0.number("T_M_degC");
  s[kTempExchanger] = x0.number("T_EK_degC");
  s[kTempExchangerCoolant] = x0.number("T_AWT_degC");
  s[kTempAdiabatic] = x0.has("T_adiab_degC")
                          ? x0.number("T_adiab_degC")
                          : adiabatic_temperature(s, cfg.params);
  if ((s.head<3>().array() < 0.0).any() || s.head<3>().sum() <= 0.0)
    x0.fail("m_W_kg", "masses must be non-negative with a positive total");

  const Reader bounds = top.section("control_bounds");
  const Reader lo = bounds.section("lower");
  const Reader hi = bounds.section("upper");
  const char *keys[] = {"mdot_F_kg_per_h", "T_M_in_degC", "T_AWT_in_degC"};
  for (int i = 0; i < kNumControls; ++i) {
    cfg.bounds.lower[i] = lo.number(keys[i]);
    cfg.bounds.upper[i] = hi.number(keys[i]);
    if (!(cfg.bounds.lower[i] < cfg.bounds.upper[i]))
      hi.fail(keys[i], "upper bound must exceed lower bound");
  }
  const Reader nominal = top.section("nominal_controls");
  for (int i = 0; i < kNumControls; ++i)
    cfg.nominal_controls[i] = nominal.number(keys[i]);
  if ((cfg.bounds.clamp(cfg.nominal_controls) - cfg.nominal_controls).norm() > 0.0)
    nominal.fail(keys[0], "nominal controls must lie within the control bounds");

  const Reader noise = top.section("noise");
  cfg.noise.sigma_temperature = noise.number("sigma_temperature_degC");
  cfg.noise.sigma_mass = noise.number("sigma_mass_kg");
  if (cfg.noise.sigma_temperature < 0.0 || cfg.noise.sigma_mass < 0.0)
    noise.fail("sigma_temperature_degC", "noise levels must be non-negative");

  const Reader c = top.section("constraints");
  cfg.constraints.setpoint = c.number("t_set_degC");
  cfg.constraints.band = c.number("band_degC");
  cfg.constraints.adiabatic_max = c.number("t_adiab_max_degC");
  cfg.constraints.batch_duration_h = c.number("batch_duration_h");
  try {
    cfg.constraints.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }

  const Reader integ = top.section("integration");
  cfg.integration.dt_s = integ.number("dt_s");
  cfg.integration.substeps = static_cast<int>(integ.number("substeps"));
  if (!(cfg.integration.dt_s > 0.0) || cfg.integration.substeps < 1)
    integ.fail("dt_s", "dt_s must be positive and substeps >= 1");
  return cfg;
}

PlantConfig load_plant_config(const std::filesystem::path &path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile &) {
    throw ConfigError(fmt::format("cannot open plant config '{}'", path.string()));
  } catch (const YAML::ParserException &e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", path.string(), e.mark.line + 1,
                                  e.mark.column + 1, e.msg));
  }
  return parse_plant_config(root, path.string());
}

} // namespace gpmpc::plant
