//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/numerics/linalg.hpp"

#include <cmath>

#include <fmt/format.h>

namespace gpmpc::numerics {
namespace {

constexpr double kSymmetryTolerance = 1e-8;
constexpr double kInitialJitterFraction = 1e-10;
constexpr double kMaxJitterFraction = 1e-4;

void check_symmetric(const Matrix &a) {
  if (a.rows() != a.cols())
    throw DimensionMismatch(
        fmt::format("cholesky: matrix is {}x{}", a.rows(), a.cols()));
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryTolerance * scale)
        throw std::invalid_argument(
            fmt::format("cholesky: matrix not symmetric at ({}, {})", i, j));
}

} // namespace

double CholeskyFactor::log_determinant() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

CholeskyFactor cholesky(const Matrix &a, double jitter) {
  if (jitter < 0.0)
    throw std::invalid_argument("cholesky: negative jitter");
  check_symmetric(a);
  const Eigen::Index n = a.rows();
  if (n == 0)
    return {Matrix(0, 0), jitter};

  const double mean_diag = a.trace() / static_cast<double>(n);
  const double max_jitter =
      mean_diag > 0.0 ? kMaxJitterFraction * mean_diag : 0.0;

  double current = jitter;
  while (true) {
    Matrix shifted = a;
    shifted.diagonal().array() += current;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success &&
        llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)
      return {llt.matrixL(), current};

    const double next =
        current > 0.0 ? 10.0 * current : kInitialJitterFraction * mean_diag;
    if (!(next > 0.0) || next > max_jitter || !std::isfinite(next))
      throw NotPositiveDefinite(fmt::format(
          "cholesky: not positive definite (n = {}, last jitter {:.3e})", n,
          current));
    current = next;
  }
}

Matrix solve_psd(const CholeskyFactor &factor, const Matrix &b) {
  if (b.rows() != factor.size())
    throw DimensionMismatch(fmt::format("solve_psd: factor is {}x{}, rhs has {} rows",
                                        factor.size(), factor.size(), b.rows()));
  const auto lower = factor.lower.triangularView<Eigen::Lower>();
  Matrix x = lower.solve(b);
  lower.transpose().solveInPlace(x);
  return x;
}

Vector solve_psd(const CholeskyFactor &factor, const Vector &b) {
  if (b.size() != factor.size())
    throw DimensionMismatch(fmt::format("solve_psd: factor is {}x{}, rhs has {} rows",
                                        factor.size(), factor.size(), b.size()));
  const auto lower = factor.lower.triangularView<Eigen::Lower>();
  Vector x = lower.solve(b);
  lower.transpose().solveInPlace(x);
  return x;
}

Matrix solve_lower(const CholeskyFactor &factor, const Matrix &b) {
  if (b.rows() != factor.size())
    throw DimensionMismatch("solve_lower: row count mismatch");
  return factor.lower.triangularView<Eigen::Lower>().solve(b);
}

Matrix inverse_psd(const CholeskyFactor &factor) {
  return solve_psd(factor, Matrix(Matrix::Identity(factor.size(), factor.size())));
}

} // namespace gpmpc::numerics
