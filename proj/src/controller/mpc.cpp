//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/controller/mpc.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace gpmpc::controller {
namespace {

nlohmann::json to_json(const Vector &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

} // namespace

MpcController::MpcController(std::shared_ptr<const PredictiveModel> model, OcpSpec spec,
                             Vector initial_move)
    : model_(std::move(model)), spec_(std::move(spec)),
      previous_move_(std::move(initial_move)) {
  if (!model_)
    throw std::invalid_argument("MpcController: null model");
  spec_.validate(model_->state_dim(), model_->control_dim());
  if (previous_move_.size() != model_->control_dim())
    throw numerics::DimensionMismatch("MpcController: initial move dimension");
  warm_.assign(static_cast<std::size_t>(spec_.horizon), previous_move_);
}

Vector MpcController::step(const Vector &y) {
  const bool was_cold = cold_;
  nlohmann::json entry = {{"l", step_index_}, {"start", was_cold ? "cold" : "warm"}};
  Vector move;
  try {
    OcpSolution sol = solve_ocp(*model_, spec_, y, warm_);
    move = sol.controls.front();
    std::vector<Vector> shifted(sol.controls.begin() + 1, sol.controls.end());
    shifted.push_back(sol.controls.back());
    warm_ = std::move(shifted);
    entry["iterations"] = sol.iterations;
    entry["evaluations"] = sol.evaluations;
    entry["converged"] = sol.converged;
    entry["objective"] = sol.objective;
    nlohmann::json slacks = nlohmann::json::array();
    for (Eigen::Index j = 0; j < sol.slacks.rows(); ++j)
      slacks.push_back(to_json(sol.slacks.row(j).transpose()));
    entry["slacks"] = slacks;
    entry["event"] = "solved";
    last_ = std::move(sol);
    cold_ = false;
  } catch (const SolverDiverged &e) {
    ++failures_;
    move = previous_move_;
    entry["iterations"] = e.iterations;
    entry["event"] = "hold";
    entry["error"] = e.what();
    spdlog::warn("mpc step {}: {}; holding previous move", step_index_, e.what());
  }
  entry["u"] = to_json(move);
  if (log_)
    *log_ << entry.dump() << '\n';
  previous_move_ = move;
  ++step_index_;
  return move;
}

} // namespace gpmpc::controller
