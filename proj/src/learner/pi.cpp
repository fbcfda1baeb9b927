//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/learner/pi.hpp"

#include <algorithm>
#include <stdexcept>

namespace gpmpc::learner {

PiController::PiController(PiSettings settings) : s_(settings) {
  if (!(s_.upper > s_.lower))
    throw std::invalid_argument("PiController: upper bound must exceed lower bound");
  if (!(s_.dt_s > 0.0))
    throw std::invalid_argument("PiController: dt_s must be positive");
}

double PiController::update(double measurement) {
  const double e = s_.setpoint - measurement;
  const double candidate_integral = integral_ + e * s_.dt_s;
  const double raw = s_.bias + s_.k_p * e + s_.k_i * candidate_integral;
  const bool saturated_high = raw > s_.upper && e > 0.0;
  const bool saturated_low = raw < s_.lower && e < 0.0;
  if (!saturated_high && !saturated_low)
    integral_ = candidate_integral;
  const double u = s_.bias + s_.k_p * e + s_.k_i * integral_;
  return std::clamp(u, s_.lower, s_.upper);
}

} // namespace gpmpc::learner
