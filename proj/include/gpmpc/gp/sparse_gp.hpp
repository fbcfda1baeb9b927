//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <functional>

#include "gpmpc/gp/exact_gp.hpp"

namespace gpmpc::gp {

struct VfeResult {
  double value = 0.0;
  Vector hyper_gradient;    ///< w.r.t. Hyperparams::to_log()
  Matrix inducing_gradient; ///< same shape as the inducing inputs
};

/// Collapsed variational lower bound on the log marginal likelihood,
///   log N(Y | 0, Q_nn + sigma_n^2 I) - tr(K_nn - Q_nn) / (2 sigma_n^2),
/// with Q_nn = K_nm K_mm^{-1} K_mn, and its gradient.
VfeResult vfe_bound(const Hyperparams &hp, const Matrix &inducing,
                    const Matrix &inputs, const Vector &targets);

/// Local behaviour of a kernel-expansion posterior mean
///   mu(z) = sum_c w_c k(z, c)
/// and its variance around one input.
struct LocalExpansion {
  double mean = 0.0;
  double variance = 0.0;
  Vector mean_gradient;
  Vector variance_gradient;

  /// Hessian of the mean applied to q.
  Vector mean_hessian_times(const Vector &q) const;

  // Per-centre terms used by mean_hessian_times.
  Vector weighted_kernel;  ///< w_c k(z, c)
  Matrix scaled_offsets;   ///< rows (z - c) / lengthscale^2
  Vector inv_sq_lengthscales;
};

/// Sparse VFE posterior. Predictions use
///   mean = k_m^T w,          w = sigma_n^{-2} Sigma^{-1} K_mn Y
///   var  = sigma_f^2 - |P k_m|^2 + |R k_m|^2
/// with Sigma = K_mm + sigma_n^{-2} K_mn K_nm, P = chol(K_mm)^{-1} and
/// R^T R = Sigma^{-1}. The first two terms form the non-negative Nystrom
/// residual and are evaluated together.
class SparseGp {
public:
  /// Builds the caches from training data.
  SparseGp(Hyperparams hp, Matrix inducing, const Matrix &inputs, const Vector &targets);
  /// Restores a model from previously computed caches.
  SparseGp(Hyperparams hp, Matrix inducing, Vector weights, Matrix prior_factor,
           Matrix posterior_factor);

  const Hyperparams &hyperparams() const { return hp_; }
  const Matrix &inducing() const { return inducing_; }
  const Vector &weights() const { return weights_; }
  const Matrix &prior_factor() const { return prior_factor_; }
  const Matrix &posterior_factor() const { return posterior_factor_; }
  Eigen::Index num_inducing() const { return inducing_.rows(); }

  Prediction predict(const Vector &z) const;
  Vector mean_gradient(const Vector &z) const;
  LocalExpansion expand(const Vector &z) const;

private:
  double variance_from(const Vector &pk, const Vector &rk) const;

  Hyperparams hp_;
  Matrix inducing_;
  Vector weights_;
  Matrix prior_factor_;     ///< P
  Matrix posterior_factor_; ///< R
  Vector inv_sq_lengthscales_;
};

struct SparseFitOptions : FitOptions {
  int num_inducing = 20;
  /// Keep the initial inducing inputs fixed and train hyperparameters only.
  bool freeze_inducing = false;
  /// Hyperparameters held at hp0; only inducing inputs move (if not frozen).
  bool freeze_hyperparams = false;
  /// Observer called with every accepted optimizer iterate.
  std::function<void(const Hyperparams &, const Matrix &, double bound)> on_iterate;
};

/// Greedy farthest-point subset of the rows of `inputs`, starting from the
/// row closest to the centroid.
Matrix farthest_point_subset(const Matrix &inputs, Eigen::Index count);

/// Maximizes the VFE bound jointly over hyperparameters and inducing inputs.
/// num_inducing larger than the number of rows is clamped with a warning.
SparseGp fit_sparse(const Matrix &inputs, const Vector &targets,
                    const Hyperparams &hp0, const SparseFitOptions &opts = {});

} // namespace gpmpc::gp
