//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/gp/exact_gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gpmpc/numerics/rng.hpp"

namespace gpmpc::gp {
namespace {

void check_data(const Matrix &inputs, const Vector &targets, const Hyperparams &hp) {
  if (inputs.rows() < 1)
    throw std::invalid_argument("GP needs at least one training point");
  if (inputs.rows() != targets.size())
    throw numerics::DimensionMismatch(
        fmt::format("GP: {} input rows but {} targets", inputs.rows(), targets.size()));
  if (inputs.cols() != hp.input_dim())
    throw numerics::DimensionMismatch("GP: input dimension does not match length scales");
}

} // namespace

LmlResult log_marginal_likelihood(const Hyperparams &hp, const Matrix &inputs,
                                  const Vector &targets) {
  check_data(inputs, targets, hp);
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  const Matrix k = kernel_matrix(inputs, inputs, hp);
  Matrix ky = k;
  ky.diagonal().array() += hp.noise_variance;
  const auto factor = numerics::cholesky(ky);
  const Vector alpha = numerics::solve_psd(factor, targets);

  LmlResult out;
  out.value = -0.5 * targets.dot(alpha) - 0.5 * factor.log_determinant() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // dL/dtheta = 1/2 tr((alpha alpha^T - Ky^{-1}) dKy/dtheta)
  const Matrix w = alpha * alpha.transpose() - numerics::inverse_psd(factor);
  out.gradient.resize(d + 2);
  out.gradient[0] = 0.5 * (w.array() * k.array()).sum();
  for (Eigen::Index dim = 0; dim < d; ++dim) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = inputs(i, dim) - inputs(j, dim);
        acc += w(i, j) * k(i, j) * diff * diff;
      }
    out.gradient[dim + 1] = 0.25 * acc / hp.sq_lengthscales[dim];
  }
  out.gradient[d + 1] = 0.5 * hp.noise_variance * w.trace();
  return out;
}

ExactGp::ExactGp(Hyperparams hp, Matrix inputs, Vector targets)
    : hp_(std::move(hp)), inputs_(std::move(inputs)), targets_(std::move(targets)) {
  hp_.validate();
  check_data(inputs_, targets_, hp_);
  Matrix ky = kernel_matrix(inputs_, inputs_, hp_);
  ky.diagonal().array() += hp_.noise_variance;
  factor_ = numerics::cholesky(ky);
  weights_ = numerics::solve_psd(factor_, targets_);
}

Prediction ExactGp::predict(const Vector &z) const {
  const Vector k = kernel_vector(inputs_, z, hp_);
  const Matrix v = numerics::solve_lower(factor_, k);
  return {k.dot(weights_), clamp_variance(hp_.signal_variance - v.squaredNorm())};
}

Vector ExactGp::mean_gradient(const Vector &z) const {
  const Vector k = kernel_vector(inputs_, z, hp_);
  Vector grad = Vector::Zero(z.size());
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
    grad -= weights_[i] * k[i] * (z - inputs_.row(i).transpose());
  return (grad.array() / hp_.sq_lengthscales.array()).matrix();
}

double ExactGp::log_marginal_likelihood() const {
  return -0.5 * targets_.dot(weights_) - 0.5 * factor_.log_determinant() -
         0.5 * static_cast<double>(targets_.size()) * std::log(2.0 * std::numbers::pi);
}

ExactGp fit_exact(const Matrix &inputs, const Vector &targets,
                  const Hyperparams &hp0, const FitOptions &opts) {
  if (opts.restarts < 1)
    throw std::invalid_argument("fit_exact: restarts must be >= 1");
  check_data(inputs, targets, hp0);
  const auto box = Hyperparams::log_bounds(hp0.input_dim());
  auto objective = [&](const Vector &theta, Vector &grad) {
    try {
      const auto lml = log_marginal_likelihood(Hyperparams::from_log(theta), inputs, targets);
      grad = -lml.gradient;
      return -lml.value;
    } catch (const numerics::NotPositiveDefinite &) {
      grad = Vector::Zero(theta.size());
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  numerics::RngStream rng(opts.seed);
  std::optional<numerics::MinimizeResult> best;
  const Vector start = box.project(hp0.to_log());
  for (int r = 0; r < opts.restarts; ++r) {
    Vector theta0 = start;
    if (r > 0)
      for (Eigen::Index i = 0; i < theta0.size(); ++i)
        theta0[i] += opts.perturbation * rng.normal();
    theta0 = box.project(theta0);
    try {
      auto result = numerics::minimize(objective, theta0, box, opts.optimizer);
      if (!best || result.value < best->value)
        best = std::move(result);
    } catch (const numerics::NonFiniteObjective &e) {
      spdlog::debug("fit_exact restart {} failed: {}", r, e.what());
    }
  }
  if (!best)
    throw AllRestartsFailed("fit_exact: every restart failed");
  return ExactGp(Hyperparams::from_log(best->x), inputs, targets);
}

} // namespace gpmpc::gp
