//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "gpmpc/gp/sparse_gp.hpp"
#include "gpmpc/statespace/dataset.hpp"

namespace gpmpc::statespace {

/// Gaussian belief with diagonal covariance.
struct StateBelief {
  Vector mean;
  Vector variance;
};

/// Derivatives of one propagation step in physical units.
struct StepJacobian {
  Matrix mean_mean;      ///< d mean+ / d mean
  Matrix mean_control;   ///< d mean+ / d u
  Matrix var_mean;       ///< d var+ / d mean
  Matrix var_var;        ///< d var+ / d var
  Matrix var_control;    ///< d var+ / d u
};

/// A probabilistic one-step model acting on standardized inputs
/// [state, control] and returning standardized outputs.
class TransitionModel {
public:
  virtual ~TransitionModel() = default;

  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index control_dim() const = 0;
  virtual const Standardization &stats() const = 0;
  /// Local expansion of output i at a standardized input.
  virtual gp::LocalExpansion expand_output(Eigen::Index i, const Vector &z) const = 0;
  /// Observation noise variance of output i, standardized.
  virtual double noise_variance(Eigen::Index i) const = 0;

  /// Noise variances in physical units.
  Vector physical_noise_variance() const;
};

/// One sparse GP per state on a shared standardized input space.
class GpStateSpaceModel final : public TransitionModel {
public:
  GpStateSpaceModel(std::vector<gp::SparseGp> outputs, Standardization stats,
                    Eigen::Index state_dim, Eigen::Index control_dim);

  Eigen::Index state_dim() const override { return state_dim_; }
  Eigen::Index control_dim() const override { return control_dim_; }
  const Standardization &stats() const override { return stats_; }
  gp::LocalExpansion expand_output(Eigen::Index i, const Vector &z) const override;
  double noise_variance(Eigen::Index i) const override;

  const std::vector<gp::SparseGp> &outputs() const { return outputs_; }

private:
  std::vector<gp::SparseGp> outputs_;
  Standardization stats_;
  Eigen::Index state_dim_;
  Eigen::Index control_dim_;
};

struct ModelFitOptions {
  int num_inducing = 20;
  int restarts = 3;
  std::uint64_t seed = 0;
  double initial_signal_variance = 1.0;
  double initial_sq_lengthscale = 1.0;
  double initial_noise_variance = 1e-2;
  numerics::MinimizeOptions optimizer = gp::FitOptions{}.optimizer;
};

/// Fits one sparse GP per output; output i uses a seed derived from
/// (opts.seed, i).
GpStateSpaceModel fit_model(const TransitionDataset &dataset, const ModelFitOptions &opts = {});

/// One moment-matching step: mean through the posterior mean, variance as
/// the posterior variance plus the first-order term for the input variance
/// (state inputs only; controls are deterministic).
StateBelief propagate(const TransitionModel &model, const StateBelief &belief,
                      const Vector &control, StepJacobian *jacobian = nullptr);

/// Beliefs after each control; element j is the belief at step j+1.
std::vector<StateBelief> rollout(const TransitionModel &model, const StateBelief &initial,
                                 const std::vector<Vector> &controls);

nlohmann::json model_to_json(const GpStateSpaceModel &model);
GpStateSpaceModel model_from_json(const nlohmann::json &j);

} // namespace gpmpc::statespace
