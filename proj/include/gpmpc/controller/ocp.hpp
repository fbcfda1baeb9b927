//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gpmpc/controller/predictive_model.hpp"
#include "gpmpc/numerics/optimize.hpp"

namespace gpmpc::controller {

enum class ObjectiveKind { kTracking, kEconomic };
enum class ChanceMode { kMeanOnly, kChance };
enum class GradientMode { kAdjoint, kFiniteDifference };

std::string to_string(ObjectiveKind kind);
std::string to_string(ChanceMode mode);
ObjectiveKind parse_objective(const std::string &text);
ChanceMode parse_chance_mode(const std::string &text);
std::string to_string(GradientMode mode);
GradientMode parse_gradient_mode(const std::string &text);

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kTracking;
  Eigen::Index state_index = 0;
  double setpoint = 0.0; ///< tracking only
};

/// h^T x <= b on the state.
struct LinearConstraint {
  Vector h;
  double b = 0.0;
};

struct SolverOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;         ///< projected-gradient norm, normalized controls
  double relative_decrease = 1e-10;
  GradientMode gradient = GradientMode::kAdjoint;
  double fd_step = 1e-6;           ///< in normalized control units
  /// The solver minimizes alpha * (s + sqrt(s^2 + delta^2)) / 2 in place of
  /// alpha * max(0, s); 0 selects the exact penalty.
  double penalty_smoothing = 1e-4;
};

struct OcpSpec {
  int horizon = 12;
  Objective objective;
  double terminal_weight = 1.0;
  double penalty_weight = 1000.0;
  double epsilon = 0.95;
  ChanceMode chance_mode = ChanceMode::kChance;
  std::vector<LinearConstraint> constraints;
  Vector control_lower;
  Vector control_upper;
  SolverOptions solver;

  void validate(Eigen::Index state_dim, Eigen::Index control_dim) const;
};

class SolverDiverged : public std::runtime_error {
public:
  SolverDiverged(const std::string &what, int iterations, int evaluations)
      : std::runtime_error(what), iterations(iterations), evaluations(evaluations) {}
  int iterations;
  int evaluations;
};

struct OcpSolution {
  std::vector<Vector> controls;     ///< N_h moves
  std::vector<StateBelief> beliefs; ///< N_h + 1 beliefs, starting with the initial one
  double objective = 0.0;          ///< exact penalties, as objective_from_beliefs
  Matrix slacks;                    ///< N_h x constraints, for steps 1..N_h
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string reason;
};

double stage_cost_tracking(const StateBelief &belief, Eigen::Index index, double setpoint);
double stage_cost_economic(const StateBelief &belief, Eigen::Index index);
double stage_cost(const StateBelief &belief, const Objective &objective);

struct ChancePenalty {
  double penalty = 0.0;
  double slack = 0.0;
};

/// Soft chance constraint h^T mu <= b - q sqrt(h^T Sigma h), q the standard
/// normal epsilon-quantile; in mean-only mode Sigma is taken as zero.
ChancePenalty chance_penalty(const StateBelief &belief, const LinearConstraint &c,
                             double epsilon, double alpha, ChanceMode mode);

/// Sum of stage costs for j < N_h, the weighted terminal cost and all
/// penalties for j >= 1, from an already-predicted belief sequence.
double objective_from_beliefs(const OcpSpec &spec, const std::vector<StateBelief> &beliefs);

/// Rolls the model forward and evaluates the objective the solver sees
/// (penalties smoothed per spec.solver.penalty_smoothing); fills `gradient`
/// (one vector per move, physical units) by the adjoint recursion if given.
double evaluate_ocp(const PredictiveModel &model, const OcpSpec &spec,
                    const StateBelief &initial, const std::vector<Vector> &controls,
                    std::vector<Vector> *gradient = nullptr,
                    std::vector<StateBelief> *beliefs = nullptr);

/// Controls are optimized as theta in [0, 1]^(N_h d_u), u = lower + theta (upper - lower).
std::vector<Vector> controls_from_decision(const OcpSpec &spec, const Vector &theta);
Vector decision_from_controls(const OcpSpec &spec, const std::vector<Vector> &controls);

/// Objective over normalized decisions; the gradient follows
/// spec.solver.gradient (adjoint or central differences).
double decision_objective(const PredictiveModel &model, const OcpSpec &spec,
                          const StateBelief &initial, const Vector &theta, Vector *gradient);

/// Box-constrained single-shooting solve started at `warm_start`.
OcpSolution solve_ocp(const PredictiveModel &model, const OcpSpec &spec, const Vector &y,
                      const std::vector<Vector> &warm_start);

} // namespace gpmpc::controller
