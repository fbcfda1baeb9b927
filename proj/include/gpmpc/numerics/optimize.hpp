//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpmpc/numerics/linalg.hpp"

namespace gpmpc::numerics {

class NonFiniteObjective : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Objective returning f(x) and writing the gradient into `grad`.
using Objective = std::function<double(const Vector &x, Vector &grad)>;

/// Element-wise bounds; use +-infinity for unbounded coordinates.
struct Box {
  Vector lower;
  Vector upper;

  static Box unbounded(Eigen::Index n);
  Vector project(const Vector &x) const;
};

struct MinimizeOptions {
  int max_iterations = 200;
  /// Stop when the infinity norm of the projected gradient drops below this.
  double tolerance = 1e-6;
  /// Stop when the relative decrease of f over one iteration drops below this.
  double relative_decrease = 0.0;
  int memory = 10;
  double armijo = 1e-4;
  double step_floor = 1e-20;
  /// Called after every accepted iterate with (x, f).
  std::function<void(const Vector &, double)> on_iterate;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string reason;
  /// Objective at x0 followed by every accepted iterate.
  std::vector<double> history;
};

/// Limited-memory BFGS with box projection and a backtracking Armijo line
/// search along the projected path. Coordinates pinned at a bound with the
/// gradient pointing outward are frozen for the quasi-Newton step.
MinimizeResult minimize(const Objective &f, const Vector &x0,
                        const std::optional<Box> &bounds = std::nullopt,
                        const MinimizeOptions &opts = {});

} // namespace gpmpc::numerics
