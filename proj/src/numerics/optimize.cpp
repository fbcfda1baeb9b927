//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/numerics/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace gpmpc::numerics {
namespace {

struct CorrectionPair {
  Vector s;
  Vector y;
  double rho;
};

bool all_finite(const Vector &v) { return v.allFinite(); }

// Two-loop recursion applied to the free coordinates only.
Vector lbfgs_direction(const std::deque<CorrectionPair> &memory,
                       const Vector &grad, const Eigen::ArrayXd &free_mask) {
  Vector q = (grad.array() * free_mask).matrix();
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    const auto &pair = memory[k];
    alpha[k] = pair.rho * pair.s.dot(q);
    q -= alpha[k] * (pair.y.array() * free_mask).matrix();
  }
  if (!memory.empty()) {
    const auto &last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const auto &pair = memory[k];
    const double beta = pair.rho * pair.y.dot(q);
    q += (alpha[k] - beta) * (pair.s.array() * free_mask).matrix();
  }
  return (-q.array() * free_mask).matrix();
}

} // namespace

Box Box::unbounded(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
}

Vector Box::project(const Vector &x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

MinimizeResult minimize(const Objective &f, const Vector &x0,
                        const std::optional<Box> &bounds,
                        const MinimizeOptions &opts) {
  const Eigen::Index n = x0.size();
  const Box box = bounds.value_or(Box::unbounded(n));
  if (box.lower.size() != n || box.upper.size() != n)
    throw DimensionMismatch("minimize: bounds do not match x0");
  if ((box.lower.array() > box.upper.array()).any())
    throw std::invalid_argument("minimize: lower bound exceeds upper bound");

  MinimizeResult result;
  Vector x = box.project(x0);
  Vector g(n);
  double fx = f(x, g);
  ++result.evaluations;
  if (!std::isfinite(fx) || !all_finite(g))
    throw NonFiniteObjective("minimize: objective not finite at x0");
  result.history.push_back(fx);

  std::deque<CorrectionPair> memory;
  auto finish = [&](bool converged, std::string reason) {
    result.x = x;
    result.value = fx;
    result.gradient = g;
    result.converged = converged;
    result.reason = std::move(reason);
    return result;
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Vector projected_step = box.project(x - g) - x;
    if (projected_step.lpNorm<Eigen::Infinity>() <= opts.tolerance)
      return finish(true, "projected gradient below tolerance");

    Eigen::ArrayXd free_mask = Eigen::ArrayXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= box.lower[i] && g[i] > 0.0) ||
          (x[i] >= box.upper[i] && g[i] < 0.0))
        free_mask[i] = 0.0;
    }

    bool accepted = false;
    bool saw_nonfinite = false;
    Vector x_trial(n), g_trial(n);
    double f_trial = fx;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vector d = lbfgs_direction(memory, g, free_mask);
      const double slope = d.dot(g);
      if (!(slope < 0.0) || !all_finite(d)) {
        memory.clear();
        d = (-g.array() * free_mask).matrix();
      }
      double t = 1.0;
      if (memory.empty()) {
        const double dmax = d.lpNorm<Eigen::Infinity>();
        if (dmax > 0.0)
          t = std::min(1.0, 1.0 / dmax);
      }
      while (t >= opts.step_floor) {
        x_trial = box.project(x + t * d);
        const double predicted = g.dot(x_trial - x);
        if ((x_trial - x).lpNorm<Eigen::Infinity>() == 0.0)
          break;
        f_trial = f(x_trial, g_trial);
        ++result.evaluations;
        if (!std::isfinite(f_trial) || !all_finite(g_trial)) {
          saw_nonfinite = true;
        } else if (f_trial <= fx + opts.armijo * std::min(0.0, predicted) &&
                   f_trial <= fx) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        if (memory.empty())
          break;
        memory.clear();
      }
    }

    if (!accepted) {
      if (saw_nonfinite)
        throw NonFiniteObjective(
            "minimize: non-finite objective during line search");
      return finish(false, "line search failed");
    }

    Vector s = x_trial - x;
    Vector y = g_trial - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > opts.memory)
        memory.pop_front();
    }

    const double previous = fx;
    x = x_trial;
    fx = f_trial;
    g = g_trial;
    result.iterations = iter + 1;
    result.history.push_back(fx);
    if (opts.on_iterate)
      opts.on_iterate(x, fx);

    if (opts.relative_decrease > 0.0 &&
        previous - fx <= opts.relative_decrease *
                             std::max({std::abs(previous), std::abs(fx), 1.0}))
      return finish(true, "relative decrease below tolerance");
  }
  const Vector projected_step = box.project(x - g) - x;
  if (projected_step.lpNorm<Eigen::Infinity>() <= opts.tolerance)
    return finish(true, "projected gradient below tolerance");
  return finish(false, "iteration limit reached");
}

} // namespace gpmpc::numerics
