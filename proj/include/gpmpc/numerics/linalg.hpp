//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gpmpc::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NotPositiveDefinite : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Lower-triangular factor of A + jitter * I.
struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;

  Eigen::Index size() const { return lower.rows(); }
  double log_determinant() const;
};

/// Factorizes A + jitter * I. On failure the jitter is escalated by factors of
/// ten (starting at 1e-10 * trace(A)/n when the requested jitter is zero) until
/// it would exceed 1e-4 * trace(A)/n, after which NotPositiveDefinite is thrown.
CholeskyFactor cholesky(const Matrix &a, double jitter = 0.0);

/// Solves (L L^T) X = B.
Matrix solve_psd(const CholeskyFactor &factor, const Matrix &b);
Vector solve_psd(const CholeskyFactor &factor, const Vector &b);

/// L^{-1} B
Matrix solve_lower(const CholeskyFactor &factor, const Matrix &b);

/// Explicit (L L^T)^{-1}; only for small matrices.
Matrix inverse_psd(const CholeskyFactor &factor);

} // namespace gpmpc::numerics
