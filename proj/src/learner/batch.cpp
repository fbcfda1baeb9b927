//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/learner/batch.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gpmpc/learner/output.hpp"

namespace gpmpc::learner {

statespace::Trajectory BatchRecord::trajectory() const {
  statespace::Trajectory t;
  t.outputs.assign(measurements.begin(), measurements.end());
  t.controls.assign(controls.begin(), controls.end());
  return t;
}

BatchRecord run_batch(const plant::PlantConfig &config, const Policy &policy,
                      numerics::RngStream &noise) {
  const int steps = config.steps_per_batch();
  BatchRecord rec;
  rec.states.reserve(steps + 1);
  rec.measurements.reserve(steps + 1);
  rec.controls.reserve(steps);
  plant::StateVector x = config.initial_state;
  rec.states.push_back(x);
  rec.measurements.push_back(plant::measure(x, config.noise, noise));
  for (int l = 0; l < steps; ++l) {
    const plant::ControlVector u = config.bounds.clamp(policy(rec.measurements.back()));
    x = plant::step(x, u, config.params, config.integration);
    rec.controls.push_back(u);
    rec.states.push_back(x);
    rec.measurements.push_back(plant::measure(x, config.noise, noise));
  }
  return rec;
}

PiSettings pi_settings_for(const plant::PlantConfig &config, double k_p, double k_i) {
  PiSettings s;
  s.k_p = k_p;
  s.k_i = k_i;
  s.dt_s = config.integration.dt_s;
  s.setpoint = config.constraints.setpoint;
  s.bias = config.nominal_controls[plant::kJacketInletTemp];
  s.lower = config.bounds.lower[plant::kJacketInletTemp];
  s.upper = config.bounds.upper[plant::kJacketInletTemp];
  return s;
}

BatchRecord run_pi_batch(const plant::PlantConfig &config, const PiSettings &settings,
                         numerics::RngStream &noise) {
  PiController pi(settings);
  const plant::ControlVector nominal = config.nominal_controls;
  return run_batch(
      config,
      [&](const plant::StateVector &y) {
        plant::ControlVector u = nominal;
        u[plant::kJacketInletTemp] = pi.update(y[plant::kTempReactor]);
        return u;
      },
      noise);
}

MetricRecord compute_metrics(const BatchRecord &batch, const plant::ConstraintSpec &spec,
                             int batch_index) {
  MetricRecord m;
  m.batch = batch_index;
  m.solver_failures = batch.solver_failures;
  const std::size_t n = batch.states.size();
  if (n < 2)
    return m;
  double sq = 0.0, violation_sum = 0.0;
  std::vector<double> second_half;
  for (std::size_t l = 1; l < n; ++l) {
    const auto &x = batch.states[l];
    const double e = x[plant::kTempReactor] - spec.setpoint;
    sq += e * e;
    const auto v = plant::violation(x, spec);
    violation_sum += v.sum();
    m.max_band_violation = std::max({m.max_band_violation, v[0], v[1]});
    m.max_adiabatic_violation = std::max(m.max_adiabatic_violation, v[2]);
    if (2 * l > n - 1)
      second_half.push_back(x[plant::kTempReactor]);
  }
  const double steps = static_cast<double>(n - 1);
  m.rmse = std::sqrt(sq / steps);
  m.mean_violation = violation_sum / steps;
  m.final_product = batch.states.back()[plant::kMassPolymer];
  m.product_gain = m.final_product - batch.states.front()[plant::kMassPolymer];
  if (!second_half.empty()) {
    auto mid = second_half.begin() + static_cast<std::ptrdiff_t>(second_half.size() / 2);
    std::nth_element(second_half.begin(), mid, second_half.end());
    m.second_hour_median_tr = *mid;
    if (second_half.size() % 2 == 0) {
      const double lower = *std::max_element(second_half.begin(), mid);
      m.second_hour_median_tr = 0.5 * (m.second_hour_median_tr + lower);
    }
  }
  return m;
}

void write_trajectory_csv(const BatchRecord &batch, const plant::PlantConfig &config,
                          const std::filesystem::path &path) {
  std::string out = "t_h";
  for (int i = 0; i < plant::kNumStates; ++i)
    out += fmt::format(",{}", plant::state_name(i));
  for (int i = 0; i < plant::kNumStates; ++i)
    out += fmt::format(",y_{}", plant::state_name(i));
  for (int i = 0; i < plant::kNumControls; ++i)
    out += fmt::format(",{}", plant::control_name(i));
  out += ",viol_tr_high_degC,viol_tr_low_degC,viol_adiab_degC\n";
  const double dt_h = config.integration.dt_hours();
  for (std::size_t l = 0; l < batch.states.size(); ++l) {
    out += fmt::format("{:.17g}", static_cast<double>(l) * dt_h);
    for (int i = 0; i < plant::kNumStates; ++i)
      out += fmt::format(",{:.17g}", batch.states[l][i]);
    for (int i = 0; i < plant::kNumStates; ++i)
      out += fmt::format(",{:.17g}", batch.measurements[l][i]);
    for (int i = 0; i < plant::kNumControls; ++i) {
      if (l < batch.controls.size())
        out += fmt::format(",{:.17g}", batch.controls[l][i]);
      else
        out += ",";
    }
    const auto v = plant::violation(batch.states[l], config.constraints);
    out += fmt::format(",{:.17g},{:.17g},{:.17g}\n", v[0], v[1], v[2]);
  }
  write_atomic(path, out);
}

} // namespace gpmpc::learner
