//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/controller/predictive_model.hpp"

#include <unsupported/Eigen/AutoDiff>

namespace gpmpc::controller {

StateBelief initial_belief(const Vector &y, const Vector &noise_variance) {
  if (y.size() != noise_variance.size())
    throw numerics::DimensionMismatch("initial_belief: dimension mismatch");
  return {y, noise_variance};
}

GpBackend::GpBackend(std::shared_ptr<const statespace::TransitionModel> model)
    : model_(std::move(model)) {
  if (!model_)
    throw std::invalid_argument("GpBackend: null model");
  noise_variance_ = model_->physical_noise_variance();
}

StateBelief GpBackend::initial_belief(const Vector &y) const {
  return controller::initial_belief(y, noise_variance_);
}

StateBelief GpBackend::propagate(const StateBelief &belief, const Vector &u,
                                 StepJacobian *jacobian) const {
  return statespace::propagate(*model_, belief, u, jacobian);
}

FullModelBackend::FullModelBackend(plant::PlantParams params, plant::Integration integration)
    : params_(std::move(params)), integration_(integration) {
  params_.validate();
}

StateBelief FullModelBackend::initial_belief(const Vector &y) const {
  return controller::initial_belief(y, Vector::Zero(plant::kNumStates));
}

StateBelief FullModelBackend::propagate(const StateBelief &belief, const Vector &u,
                                        StepJacobian *jacobian) const {
  constexpr int nx = plant::kNumStates;
  constexpr int nu = plant::kNumControls;
  if (belief.mean.size() != nx || u.size() != nu)
    throw numerics::DimensionMismatch("FullModelBackend: dimension mismatch");
  const plant::StateVector x = belief.mean;
  const plant::ControlVector uc = u;
  StateBelief next{Vector(nx), Vector::Zero(nx)};
  if (!jacobian) {
    auto f = [this](const plant::StateVector &s, const plant::ControlVector &v) {
      return plant::reactor_rhs<double>(s, v, params_);
    };
    next.mean = plant::rk4_interval<double>(f, x, uc, integration_.dt_hours(),
                                            integration_.substeps);
  } else {
    using Derivatives = Eigen::Matrix<double, nx + nu, 1>;
    using Ad = Eigen::AutoDiffScalar<Derivatives>;
    Eigen::Matrix<Ad, nx, 1> xa;
    Eigen::Matrix<Ad, nu, 1> ua;
    for (int i = 0; i < nx; ++i)
      xa[i] = Ad(x[i], nx + nu, i);
    for (int i = 0; i < nu; ++i)
      ua[i] = Ad(uc[i], nx + nu, nx + i);
    auto f = [this](const Eigen::Matrix<Ad, nx, 1> &s, const Eigen::Matrix<Ad, nu, 1> &v) {
      return plant::reactor_rhs<Ad>(s, v, params_);
    };
    const auto out = plant::rk4_interval<Ad>(f, xa, ua, integration_.dt_hours(),
                                             integration_.substeps);
    jacobian->mean_mean.resize(nx, nx);
    jacobian->mean_control.resize(nx, nu);
    for (int i = 0; i < nx; ++i) {
      next.mean[i] = out[i].value();
      jacobian->mean_mean.row(i) = out[i].derivatives().head(nx).transpose();
      jacobian->mean_control.row(i) = out[i].derivatives().tail(nu).transpose();
    }
    jacobian->var_mean = Matrix::Zero(nx, nx);
    jacobian->var_var = Matrix::Zero(nx, nx);
    jacobian->var_control = Matrix::Zero(nx, nu);
  }
  if (!next.mean.allFinite())
    throw plant::NonFiniteState("FullModelBackend: non-finite prediction");
  return next;
}

} // namespace gpmpc::controller
