//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <functional>

#include "gpmpc/numerics/linalg.hpp"

namespace gpmpc::numerics {

/// Central-difference gradient with per-coordinate step h. Throws
/// std::domain_error if any evaluation is non-finite.
Vector fd_gradient(const std::function<double(const Vector &)> &f,
                   const Vector &x, double h = 1e-5);

} // namespace gpmpc::numerics
