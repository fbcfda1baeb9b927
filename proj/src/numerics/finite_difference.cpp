//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/numerics/finite_difference.hpp"

#include <cmath>
#include <stdexcept>

namespace gpmpc::numerics {

Vector fd_gradient(const std::function<double(const Vector &)> &f,
                   const Vector &x, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("fd_gradient: step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double plus = f(probe);
    probe[i] = x[i] - h;
    const double minus = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw std::domain_error("fd_gradient: non-finite evaluation");
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

} // namespace gpmpc::numerics
