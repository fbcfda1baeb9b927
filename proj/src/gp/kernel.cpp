//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/gp/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace gpmpc::gp {
namespace {

constexpr double kVarianceFloor = -1e-10;
constexpr double kMaxLogParam = 13.8; // ~1e6
constexpr double kMaxLogNoise = 4.6;  // ~1e2

} // namespace

Hyperparams Hyperparams::isotropic(Eigen::Index dim, double signal_variance,
                                   double sq_lengthscale, double noise_variance) {
  return {signal_variance, Vector::Constant(dim, sq_lengthscale), noise_variance};
}

Vector Hyperparams::to_log() const {
  Vector v(input_dim() + 2);
  v[0] = std::log(signal_variance);
  v.segment(1, input_dim()) = sq_lengthscales.array().log().matrix();
  v[input_dim() + 1] = std::log(noise_variance);
  return v;
}

Hyperparams Hyperparams::from_log(const Vector &log_params) {
  const Eigen::Index d = log_params.size() - 2;
  Hyperparams hp;
  hp.signal_variance = std::exp(log_params[0]);
  hp.sq_lengthscales = log_params.segment(1, d).array().exp().matrix();
  hp.noise_variance = std::exp(log_params[d + 1]);
  return hp;
}

numerics::Box Hyperparams::log_bounds(Eigen::Index dim) {
  numerics::Box box{Vector(dim + 2), Vector(dim + 2)};
  box.lower[0] = std::log(1e-6);
  box.upper[0] = kMaxLogParam;
  box.lower.segment(1, dim).setConstant(std::log(kMinSquaredLengthscale));
  box.upper.segment(1, dim).setConstant(kMaxLogParam);
  box.lower[dim + 1] = std::log(kMinNoiseVariance);
  box.upper[dim + 1] = kMaxLogNoise;
  return box;
}

void Hyperparams::validate() const {
  if (!(signal_variance > 0.0) || !(noise_variance > 0.0) ||
      !(sq_lengthscales.array() > 0.0).all() || input_dim() == 0)
    throw std::invalid_argument("hyperparameters must be strictly positive");
}

double se_kernel(const Vector &a, const Vector &b, const Hyperparams &hp) {
  if (a.size() != b.size() || a.size() != hp.input_dim())
    throw numerics::DimensionMismatch(
        fmt::format("se_kernel: inputs of size {} and {}, {} length scales",
                    a.size(), b.size(), hp.input_dim()));
  const double r2 = ((a - b).array().square() / hp.sq_lengthscales.array()).sum();
  return hp.signal_variance * std::exp(-0.5 * r2);
}

Matrix kernel_matrix(const Matrix &a, const Matrix &b, const Hyperparams &hp) {
  if (a.cols() != hp.input_dim() || b.cols() != hp.input_dim())
    throw numerics::DimensionMismatch("kernel_matrix: input dimension mismatch");
  const Vector scale = hp.sq_lengthscales.array().rsqrt().matrix();
  // Column-major copies of the scaled inputs, one column per point.
  const Matrix as = (a * scale.asDiagonal()).transpose();
  const Matrix bs = (b * scale.asDiagonal()).transpose();
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k(i, j) = (as.col(i) - bs.col(j)).squaredNorm();
  return hp.signal_variance * (-0.5 * k.array()).exp().matrix();
}

Vector kernel_vector(const Matrix &points, const Vector &z, const Hyperparams &hp) {
  if (points.cols() != z.size() || z.size() != hp.input_dim())
    throw numerics::DimensionMismatch("kernel_vector: input dimension mismatch");
  const Eigen::ArrayXd inv_ls = hp.sq_lengthscales.array().inverse();
  Vector k(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double r2 =
        ((points.row(i).transpose() - z).array().square() * inv_ls).sum();
    k[i] = hp.signal_variance * std::exp(-0.5 * r2);
  }
  return k;
}

double clamp_variance(double variance) {
  if (variance >= 0.0)
    return variance;
  if (variance >= kVarianceFloor)
    return 0.0;
  throw std::runtime_error(
      fmt::format("negative predictive variance {:.3e}", variance));
}

} // namespace gpmpc::gp
