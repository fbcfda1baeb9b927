//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <stdexcept>

#include "gpmpc/gp/kernel.hpp"

namespace gpmpc::gp {

class AllRestartsFailed : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LmlResult {
  double value = 0.0;
  Vector gradient; ///< w.r.t. Hyperparams::to_log()
};

/// Log marginal likelihood of a zero-mean SE-kernel GP and its gradient with
/// respect to the log hyperparameters.
LmlResult log_marginal_likelihood(const Hyperparams &hp, const Matrix &inputs,
                                  const Vector &targets);

struct FitOptions {
  int restarts = 3;
  std::uint64_t seed = 0;
  /// Standard deviation of the log-normal restart perturbation.
  double perturbation = 1.0;
  numerics::MinimizeOptions optimizer = [] {
    numerics::MinimizeOptions o;
    o.max_iterations = 200;
    o.tolerance = 1e-5;
    return o;
  }();
};

/// Exact GP posterior with cached factorization of K + sigma_n^2 I.
class ExactGp {
public:
  ExactGp(Hyperparams hp, Matrix inputs, Vector targets);

  const Hyperparams &hyperparams() const { return hp_; }
  const Matrix &inputs() const { return inputs_; }
  const Vector &targets() const { return targets_; }

  Prediction predict(const Vector &z) const;
  Vector mean_gradient(const Vector &z) const;
  double log_marginal_likelihood() const;

private:
  Hyperparams hp_;
  Matrix inputs_;
  Vector targets_;
  numerics::CholeskyFactor factor_;
  Vector weights_; ///< (K + sigma_n^2 I)^{-1} Y
};

/// Maximizes the log marginal likelihood from hp0 and restarts-1 seeded
/// log-normal perturbations of it; returns the best model.
ExactGp fit_exact(const Matrix &inputs, const Vector &targets,
                  const Hyperparams &hp0, const FitOptions &opts = {});

} // namespace gpmpc::gp
