//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "gpmpc/learner/pi.hpp"
#include "gpmpc/numerics/rng.hpp"
#include "gpmpc/plant/config.hpp"
#include "gpmpc/statespace/dataset.hpp"

namespace gpmpc::learner {

using numerics::Matrix;
using numerics::Vector;

/// One simulated batch: true states x[0..T], measurements y[0..T], controls
/// u[0..T-1].
struct BatchRecord {
  std::vector<plant::StateVector> states;
  std::vector<plant::StateVector> measurements;
  std::vector<plant::ControlVector> controls;
  int solver_failures = 0;

  /// Measured trajectory in the form used to build GP training data.
  statespace::Trajectory trajectory() const;
};

/// Feedback law from a measurement to a control.
using Policy = std::function<plant::ControlVector(const plant::StateVector &measurement)>;

/// Closed-loop batch: measure, act, integrate, for steps_per_batch steps.
BatchRecord run_batch(const plant::PlantConfig &config, const Policy &policy,
                      numerics::RngStream &noise);

/// PI settings derived from the plant config (setpoint, bias = nominal T_M^IN,
/// actuator bounds, sampling time) with the given gains.
PiSettings pi_settings_for(const plant::PlantConfig &config, double k_p = 114.0,
                           double k_i = 0.3);

/// PI on the jacket inlet temperature from noisy T_R; other inputs nominal.
BatchRecord run_pi_batch(const plant::PlantConfig &config, const PiSettings &settings,
                         numerics::RngStream &noise);

struct MetricRecord {
  int batch = 0;
  double rmse = 0.0;                  ///< T_R vs setpoint over steps 1..T [degC]
  double final_product = 0.0;         ///< m_P at the end of the batch [kg]
  double product_gain = 0.0;          ///< final minus initial m_P [kg]
  double mean_violation = 0.0;        ///< per step, summed over constraints [degC]
  double max_band_violation = 0.0;    ///< T_R outside the band [degC]
  double max_adiabatic_violation = 0.0;
  double second_hour_median_tr = 0.0; ///< median true T_R over the second half
  int solver_failures = 0;
};

/// Metrics from true states (never the measurements).
MetricRecord compute_metrics(const BatchRecord &batch, const plant::ConstraintSpec &spec,
                             int batch_index = 0);

/// CSV with columns t_h, the true states, the measurements, the controls
/// applied at that step (blank on the last row) and the three violations.
void write_trajectory_csv(const BatchRecord &batch, const plant::PlantConfig &config,
                          const std::filesystem::path &path);

} // namespace gpmpc::learner
