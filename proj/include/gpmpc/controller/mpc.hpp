//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <memory>
#include <optional>
#include <ostream>

#include "gpmpc/controller/ocp.hpp"

namespace gpmpc::controller {

/// Receding-horizon controller: solve, apply the first move, shift.
class MpcController {
public:
  /// `initial_move` seeds the first warm start (repeated over the horizon)
  /// and is the fallback when the very first solve fails.
  MpcController(std::shared_ptr<const PredictiveModel> model, OcpSpec spec, Vector initial_move);

  /// Control for measurement y at step l. Solver failures hold the previous
  /// move and are logged.
  Vector step(const Vector &y);

  /// Per-step JSON-lines solver log; null disables logging.
  void set_log(std::ostream *log) { log_ = log; }

  const std::optional<OcpSolution> &last_solution() const { return last_; }
  const std::vector<Vector> &warm_start() const { return warm_; }
  int steps_taken() const { return step_index_; }
  int failures() const { return failures_; }
  const OcpSpec &spec() const { return spec_; }

private:
  std::shared_ptr<const PredictiveModel> model_;
  OcpSpec spec_;
  std::vector<Vector> warm_;
  Vector previous_move_;
  bool cold_ = true;
  int step_index_ = 0;
  int failures_ = 0;
  std::optional<OcpSolution> last_;
  std::ostream *log_ = nullptr;
};

} // namespace gpmpc::controller
