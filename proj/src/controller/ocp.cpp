//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/controller/ocp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gpmpc/numerics/normal.hpp"

namespace gpmpc::controller {
namespace {

struct BeliefGradient {
  Vector mean;
  Vector variance;
};

double quantile_for(const OcpSpec &spec) {
  return spec.chance_mode == ChanceMode::kChance ? numerics::std_normal_quantile(spec.epsilon)
                                                 : 0.0;
}

// Cost contributed by one belief; adds its derivative into g when given.
double accumulate_step(const OcpSpec &spec, double q, const StateBelief &b, double weight,
                       bool penalised, BeliefGradient *g) {
  const double delta = spec.solver.penalty_smoothing;
  double value = weight * stage_cost(b, spec.objective);
  if (g) {
    const Eigen::Index i = spec.objective.state_index;
    if (spec.objective.kind == ObjectiveKind::kTracking) {
      g->mean[i] += weight * 2.0 * (b.mean[i] - spec.objective.setpoint);
      g->variance[i] += weight;
    } else {
      g->mean[i] -= weight;
    }
  }
  if (!penalised)
    return value;
  for (const auto &con : spec.constraints) {
    const double spread = con.h.cwiseAbs2().dot(b.variance);
    const double root = q != 0.0 ? std::sqrt(std::max(0.0, spread)) : 0.0;
    const double s = con.h.dot(b.mean) - con.b + q * root;
    double active = 0.0;
    if (delta > 0.0) {
      const double r = std::hypot(s, delta);
      value += spec.penalty_weight * 0.5 * (s + r);
      active = 0.5 * (1.0 + s / r);
    } else if (s > 0.0) {
      value += spec.penalty_weight * s;
      active = 1.0;
    }
    if (g && active > 0.0) {
      g->mean += spec.penalty_weight * active * con.h;
      if (q != 0.0 && root > 0.0)
        g->variance += spec.penalty_weight * active * q / (2.0 * root) * con.h.cwiseAbs2();
    }
  }
  return value;
}

std::vector<Vector> to_controls(const OcpSpec &spec, const Vector &theta, Eigen::Index du) {
  std::vector<Vector> u(static_cast<std::size_t>(spec.horizon));
  const Vector range = spec.control_upper - spec.control_lower;
  for (int j = 0; j < spec.horizon; ++j)
    u[j] = spec.control_lower + theta.segment(j * du, du).cwiseProduct(range);
  return u;
}

Vector to_theta(const OcpSpec &spec, const std::vector<Vector> &u, Eigen::Index du) {
  Vector theta(spec.horizon * du);
  const Vector range = spec.control_upper - spec.control_lower;
  for (int j = 0; j < spec.horizon; ++j)
    theta.segment(j * du, du) = (u[j] - spec.control_lower).cwiseQuotient(range);
  return theta.cwiseMax(0.0).cwiseMin(1.0);
}

} // namespace

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kTracking ? "tracking" : "economic";
}

std::string to_string(ChanceMode mode) {
  return mode == ChanceMode::kChance ? "chance" : "mean_only";
}

ObjectiveKind parse_objective(const std::string &text) {
  if (text == "tracking")
    return ObjectiveKind::kTracking;
  if (text == "economic")
    return ObjectiveKind::kEconomic;
  throw std::invalid_argument(fmt::format("unknown objective '{}'", text));
}

ChanceMode parse_chance_mode(const std::string &text) {
  if (text == "chance")
    return ChanceMode::kChance;
  if (text == "mean_only")
    return ChanceMode::kMeanOnly;
  throw std::invalid_argument(fmt::format("unknown chance mode '{}'", text));
}

std::string to_string(GradientMode mode) {
  return mode == GradientMode::kAdjoint ? "adjoint" : "finite_difference";
}

GradientMode parse_gradient_mode(const std::string &text) {
  if (text == "adjoint")
    return GradientMode::kAdjoint;
  if (text == "finite_difference")
    return GradientMode::kFiniteDifference;
  throw std::invalid_argument(fmt::format("unknown gradient mode '{}'", text));
}

void OcpSpec::validate(Eigen::Index state_dim, Eigen::Index control_dim) const {
  if (horizon < 1)
    throw std::invalid_argument("OcpSpec: horizon must be >= 1");
  if (!(penalty_weight > 0.0))
    throw std::invalid_argument("OcpSpec: penalty weight must be positive");
  if (!(terminal_weight >= 0.0))
    throw std::invalid_argument("OcpSpec: terminal weight must be non-negative");
  if (chance_mode == ChanceMode::kChance && !(epsilon > 0.5 && epsilon < 1.0))
    throw std::invalid_argument(fmt::format("OcpSpec: epsilon {} outside (0.5, 1)", epsilon));
  if (objective.state_index < 0 || objective.state_index >= state_dim)
    throw std::invalid_argument("OcpSpec: objective state index out of range");
  if (control_lower.size() != control_dim || control_upper.size() != control_dim)
    throw numerics::DimensionMismatch("OcpSpec: control bounds dimension");
  if (!(control_upper.array() > control_lower.array()).all())
    throw std::invalid_argument("OcpSpec: control bounds must satisfy lower < upper");
  for (const auto &c : constraints)
    if (c.h.size() != state_dim)
      throw numerics::DimensionMismatch("OcpSpec: constraint dimension");
}

double stage_cost_tracking(const StateBelief &belief, Eigen::Index index, double setpoint) {
  const double e = belief.mean[index] - setpoint;
  return e * e + belief.variance[index];
}

double stage_cost_economic(const StateBelief &belief, Eigen::Index index) {
  return -belief.mean[index];
}

double stage_cost(const StateBelief &belief, const Objective &objective) {
  return objective.kind == ObjectiveKind::kTracking
             ? stage_cost_tracking(belief, objective.state_index, objective.setpoint)
             : stage_cost_economic(belief, objective.state_index);
}

ChancePenalty chance_penalty(const StateBelief &belief, const LinearConstraint &c,
                             double epsilon, double alpha, ChanceMode mode) {
  double tightening = 0.0;
  if (mode == ChanceMode::kChance)
    tightening = numerics::std_normal_quantile(epsilon) *
                 std::sqrt(std::max(0.0, c.h.cwiseAbs2().dot(belief.variance)));
  const double slack = std::max(0.0, c.h.dot(belief.mean) - c.b + tightening);
  return {alpha * slack, slack};
}

double objective_from_beliefs(const OcpSpec &spec, const std::vector<StateBelief> &beliefs) {
  if (static_cast<int>(beliefs.size()) != spec.horizon + 1)
    throw std::invalid_argument("objective_from_beliefs: expected N_h + 1 beliefs");
  double value = 0.0;
  for (int j = 0; j < spec.horizon; ++j)
    value += stage_cost(beliefs[j], spec.objective);
  value += spec.terminal_weight * stage_cost(beliefs[spec.horizon], spec.objective);
  for (int j = 1; j <= spec.horizon; ++j)
    for (const auto &c : spec.constraints)
      value += chance_penalty(beliefs[j], c, spec.epsilon, spec.penalty_weight, spec.chance_mode)
                   .penalty;
  return value;
}

double evaluate_ocp(const PredictiveModel &model, const OcpSpec &spec,
                    const StateBelief &initial, const std::vector<Vector> &controls,
                    std::vector<Vector> *gradient, std::vector<StateBelief> *beliefs) {
  const int n = spec.horizon;
  if (static_cast<int>(controls.size()) != n)
    throw std::invalid_argument("evaluate_ocp: control sequence length differs from horizon");
  const Eigen::Index dx = model.state_dim();
  const double q = quantile_for(spec);

  std::vector<StateBelief> path;
  path.reserve(n + 1);
  path.push_back(initial);
  std::vector<StepJacobian> jac(gradient ? n : 0);
  for (int j = 0; j < n; ++j)
    path.push_back(model.propagate(path.back(), controls[j], gradient ? &jac[j] : nullptr));

  double value = 0.0;
  std::vector<BeliefGradient> local(gradient ? n + 1 : 0);
  for (int j = 0; j <= n; ++j) {
    BeliefGradient *g = nullptr;
    if (gradient) {
      local[j] = {Vector::Zero(dx), Vector::Zero(dx)};
      g = &local[j];
    }
    const double weight = j < n ? 1.0 : spec.terminal_weight;
    value += accumulate_step(spec, q, path[j], weight, j >= 1, g);
  }

  if (gradient) {
    gradient->assign(n, Vector());
    Vector lambda_mean = local[n].mean;
    Vector lambda_var = local[n].variance;
    for (int j = n - 1; j >= 0; --j) {
      const StepJacobian &J = jac[j];
      (*gradient)[j] = J.mean_control.transpose() * lambda_mean +
                       J.var_control.transpose() * lambda_var;
      const Vector next_mean =
          local[j].mean + J.mean_mean.transpose() * lambda_mean + J.var_mean.transpose() * lambda_var;
      const Vector next_var = local[j].variance + J.var_var.transpose() * lambda_var;
      lambda_mean = next_mean;
      lambda_var = next_var;
    }
  }
  if (beliefs)
    *beliefs = std::move(path);
  return value;
}

std::vector<Vector> controls_from_decision(const OcpSpec &spec, const Vector &theta) {
  return to_controls(spec, theta, spec.control_lower.size());
}

Vector decision_from_controls(const OcpSpec &spec, const std::vector<Vector> &controls) {
  return to_theta(spec, controls, spec.control_lower.size());
}

double decision_objective(const PredictiveModel &model, const OcpSpec &spec,
                          const StateBelief &initial, const Vector &theta, Vector *gradient) {
  const Eigen::Index du = model.control_dim();
  const auto u = to_controls(spec, theta, du);
  if (!gradient)
    return evaluate_ocp(model, spec, initial, u);
  const Eigen::Index np = theta.size();
  gradient->resize(np);
  if (spec.solver.gradient == GradientMode::kAdjoint) {
    const Vector range = spec.control_upper - spec.control_lower;
    std::vector<Vector> gu;
    const double f = evaluate_ocp(model, spec, initial, u, &gu);
    for (int j = 0; j < spec.horizon; ++j)
      gradient->segment(j * du, du) = gu[j].cwiseProduct(range);
    return f;
  }
  const double h = spec.solver.fd_step;
  Vector probe = theta;
  for (Eigen::Index k = 0; k < np; ++k) {
    probe[k] = theta[k] + h;
    const double fp = evaluate_ocp(model, spec, initial, to_controls(spec, probe, du));
    probe[k] = theta[k] - h;
    const double fm = evaluate_ocp(model, spec, initial, to_controls(spec, probe, du));
    probe[k] = theta[k];
    (*gradient)[k] = (fp - fm) / (2.0 * h);
  }
  return evaluate_ocp(model, spec, initial, u);
}

OcpSolution solve_ocp(const PredictiveModel &model, const OcpSpec &spec, const Vector &y,
                      const std::vector<Vector> &warm_start) {
  const Eigen::Index dx = model.state_dim();
  const Eigen::Index du = model.control_dim();
  spec.validate(dx, du);
  if (static_cast<int>(warm_start.size()) != spec.horizon)
    throw std::invalid_argument("solve_ocp: warm start length differs from horizon");
  const StateBelief initial = model.initial_belief(y);
  const Eigen::Index np = spec.horizon * du;

  auto objective = [&](const Vector &theta, Vector &grad) {
    return decision_objective(model, spec, initial, theta, &grad);
  };

  numerics::MinimizeOptions opts;
  opts.max_iterations = spec.solver.max_iterations;
  opts.tolerance = spec.solver.tolerance;
  opts.relative_decrease = spec.solver.relative_decrease;
  const numerics::Box box{Vector::Zero(np), Vector::Ones(np)};
  const Vector theta0 = to_theta(spec, warm_start, du);

  numerics::MinimizeResult result;
  try {
    result = numerics::minimize(objective, theta0, box, opts);
  } catch (const numerics::NonFiniteObjective &e) {
    throw SolverDiverged(fmt::format("solve_ocp: {}", e.what()), 0, 0);
  } catch (const plant::NonFiniteState &e) {
    throw SolverDiverged(fmt::format("solve_ocp: {}", e.what()), 0, 0);
  }
  if (!std::isfinite(result.value) || !result.x.allFinite())
    throw SolverDiverged("solve_ocp: non-finite solution", result.iterations, result.evaluations);

  OcpSolution sol;
  sol.controls = to_controls(spec, result.x, du);
  evaluate_ocp(model, spec, initial, sol.controls, nullptr, &sol.beliefs);
  sol.objective = objective_from_beliefs(spec, sol.beliefs);
  sol.slacks = Matrix::Zero(spec.horizon, static_cast<Eigen::Index>(spec.constraints.size()));
  for (int j = 1; j <= spec.horizon; ++j)
    for (std::size_t c = 0; c < spec.constraints.size(); ++c)
      sol.slacks(j - 1, static_cast<Eigen::Index>(c)) =
          chance_penalty(sol.beliefs[j], spec.constraints[c], spec.epsilon, spec.penalty_weight,
                         spec.chance_mode)
              .slack;
  sol.iterations = result.iterations;
  sol.evaluations = result.evaluations;
  sol.converged = result.converged;
  sol.reason = result.reason;
  return sol;
}

} // namespace gpmpc::controller
