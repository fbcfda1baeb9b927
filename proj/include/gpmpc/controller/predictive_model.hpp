//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <memory>

#include "gpmpc/plant/config.hpp"
#include "gpmpc/statespace/model.hpp"

namespace gpmpc::controller {

using numerics::Matrix;
using numerics::Vector;
using statespace::StateBelief;
using statespace::StepJacobian;

/// Belief at the start of a horizon: mean y, variance noise_variance.
StateBelief initial_belief(const Vector &y, const Vector &noise_variance);

/// Prediction model seen by the optimal control problem.
class PredictiveModel {
public:
  virtual ~PredictiveModel() = default;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index control_dim() const = 0;
  virtual StateBelief initial_belief(const Vector &y) const = 0;
  virtual StateBelief propagate(const StateBelief &belief, const Vector &u,
                                StepJacobian *jacobian = nullptr) const = 0;
};

/// Moment-matched GP state-space predictions.
class GpBackend final : public PredictiveModel {
public:
  explicit GpBackend(std::shared_ptr<const statespace::TransitionModel> model);

  Eigen::Index state_dim() const override { return model_->state_dim(); }
  Eigen::Index control_dim() const override { return model_->control_dim(); }
  StateBelief initial_belief(const Vector &y) const override;
  StateBelief propagate(const StateBelief &belief, const Vector &u,
                        StepJacobian *jacobian) const override;

  const statespace::TransitionModel &model() const { return *model_; }

private:
  std::shared_ptr<const statespace::TransitionModel> model_;
  Vector noise_variance_;
};

/// Exact reactor ODEs with zero variance; Jacobians by forward-mode
/// automatic differentiation through the integrator.
class FullModelBackend final : public PredictiveModel {
public:
  FullModelBackend(plant::PlantParams params, plant::Integration integration);

  Eigen::Index state_dim() const override { return plant::kNumStates; }
  Eigen::Index control_dim() const override { return plant::kNumControls; }
  StateBelief initial_belief(const Vector &y) const override;
  StateBelief propagate(const StateBelief &belief, const Vector &u,
                        StepJacobian *jacobian) const override;

private:
  plant::PlantParams params_;
  plant::Integration integration_;
};

} // namespace gpmpc::controller
