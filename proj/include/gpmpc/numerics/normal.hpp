//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

namespace gpmpc::numerics {

/// Standard normal CDF.
double std_normal_cdf(double x);

/// Inverse of the standard normal CDF for p in (0, 1). Rational
/// approximation refined by one Halley step; |cdf(q) - p| <= 1e-9.
/// Throws std::domain_error outside (0, 1).
double std_normal_quantile(double p);

} // namespace gpmpc::numerics
