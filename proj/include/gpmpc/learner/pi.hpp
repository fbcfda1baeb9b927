//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

namespace gpmpc::learner {

struct PiSettings {
  double k_p = 114.0;
  double k_i = 0.3;       ///< per second
  double dt_s = 50.0;
  double setpoint = 90.0;
  double bias = 90.0;     ///< output at zero error and empty integral
  double lower = 60.0;
  double upper = 100.0;
};

/// Discrete PI law u = bias + k_p e + k_i dt sum(e) with e = setpoint - y.
/// The integral is frozen while the output saturates in the direction the
/// error would push it further (conditional integration).
class PiController {
public:
  explicit PiController(PiSettings settings);

  double update(double measurement);
  double integral() const { return integral_; }
  const PiSettings &settings() const { return s_; }

private:
  PiSettings s_;
  double integral_ = 0.0; ///< sum of e * dt
};

} // namespace gpmpc::learner
