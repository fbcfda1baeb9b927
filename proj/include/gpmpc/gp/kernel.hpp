//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "gpmpc/numerics/linalg.hpp"
#include "gpmpc/numerics/optimize.hpp"

namespace gpmpc::gp {

using numerics::Matrix;
using numerics::Vector;

inline constexpr double kMinNoiseVariance = 1e-8;
inline constexpr double kMinSquaredLengthscale = 1e-6;

/// Hyperparameters of a zero-mean GP with squared-exponential kernel.
struct Hyperparams {
  double signal_variance = 1.0;
  Vector sq_lengthscales; ///< one squared length scale per input dimension
  double noise_variance = 1e-2;

  Eigen::Index input_dim() const { return sq_lengthscales.size(); }

  static Hyperparams isotropic(Eigen::Index dim, double signal_variance,
                               double sq_lengthscale, double noise_variance);

  /// [log signal, log lengthscales..., log noise]
  Vector to_log() const;
  static Hyperparams from_log(const Vector &log_params);
  /// Box in log space enforcing the positivity floors.
  static numerics::Box log_bounds(Eigen::Index dim);
  void validate() const;
};

/// sigma_f^2 exp(-1/2 (a - b)^T Lambda^{-1} (a - b))
double se_kernel(const Vector &a, const Vector &b, const Hyperparams &hp);

/// Row-wise kernel matrix between the rows of `a` and the rows of `b`.
Matrix kernel_matrix(const Matrix &a, const Matrix &b, const Hyperparams &hp);

/// Kernel vector between the rows of `points` and a single input `z`.
Vector kernel_vector(const Matrix &points, const Vector &z, const Hyperparams &hp);

/// Posterior moments of a scalar GP output.
struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Variances in [-1e-10, 0) become zero; anything below throws.
double clamp_variance(double variance);

} // namespace gpmpc::gp
