//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/statespace/model.hpp"

#include <fmt/format.h>

#include "gpmpc/gp/serialize.hpp"
#include "gpmpc/numerics/rng.hpp"

namespace gpmpc::statespace {

Vector TransitionModel::physical_noise_variance() const {
  Vector v(state_dim());
  for (Eigen::Index i = 0; i < state_dim(); ++i)
    v[i] = noise_variance(i) * stats().scale[i] * stats().scale[i];
  return v;
}

GpStateSpaceModel::GpStateSpaceModel(std::vector<gp::SparseGp> outputs, Standardization stats,
                                     Eigen::Index state_dim, Eigen::Index control_dim)
    : outputs_(std::move(outputs)), stats_(std::move(stats)), state_dim_(state_dim),
      control_dim_(control_dim) {
  if (static_cast<Eigen::Index>(outputs_.size()) != state_dim_ ||
      stats_.mean.size() != state_dim_ + control_dim_ ||
      stats_.scale.size() != state_dim_ + control_dim_)
    throw numerics::DimensionMismatch("GpStateSpaceModel: inconsistent dimensions");
  for (const auto &gp : outputs_)
    if (gp.hyperparams().input_dim() != state_dim_ + control_dim_)
      throw numerics::DimensionMismatch("GpStateSpaceModel: output model input dimension");
}

gp::LocalExpansion GpStateSpaceModel::expand_output(Eigen::Index i, const Vector &z) const {
  return outputs_.at(static_cast<std::size_t>(i)).expand(z);
}

double GpStateSpaceModel::noise_variance(Eigen::Index i) const {
  return outputs_.at(static_cast<std::size_t>(i)).hyperparams().noise_variance;
}

GpStateSpaceModel fit_model(const TransitionDataset &dataset, const ModelFitOptions &opts) {
  if (dataset.size() < 2)
    throw EmptyInput(fmt::format("fit_model: need at least 2 transitions, got {}", dataset.size()));
  const Matrix z = dataset.standardized_inputs();
  const Matrix y = dataset.standardized_targets();
  const gp::Hyperparams hp0 =
      gp::Hyperparams::isotropic(z.cols(), opts.initial_signal_variance,
                                 opts.initial_sq_lengthscale, opts.initial_noise_variance);
  std::vector<gp::SparseGp> outputs;
  outputs.reserve(static_cast<std::size_t>(dataset.state_dim));
  for (Eigen::Index i = 0; i < dataset.state_dim; ++i) {
    gp::SparseFitOptions fit;
    fit.num_inducing = opts.num_inducing;
    fit.restarts = opts.restarts;
    fit.seed = numerics::RngStream::derive(opts.seed, static_cast<std::uint64_t>(i)).seed();
    fit.optimizer = opts.optimizer;
    outputs.push_back(gp::fit_sparse(z, y.col(i), hp0, fit));
  }
  return GpStateSpaceModel(std::move(outputs), dataset.stats, dataset.state_dim,
                           dataset.control_dim);
}

StateBelief propagate(const TransitionModel &model, const StateBelief &belief,
                      const Vector &control, StepJacobian *jacobian) {
  const Eigen::Index dx = model.state_dim();
  const Eigen::Index du = model.control_dim();
  if (belief.mean.size() != dx || belief.variance.size() != dx || control.size() != du)
    throw numerics::DimensionMismatch("propagate: dimension mismatch");
  const Standardization &s = model.stats();
  Vector raw(dx + du);
  raw << belief.mean, control;
  const Vector z = s.apply(raw);
  const Vector input_var =
      belief.variance.cwiseQuotient(s.scale.head(dx).cwiseProduct(s.scale.head(dx)));

  StateBelief next{Vector(dx), Vector(dx)};
  if (jacobian) {
    jacobian->mean_mean.resize(dx, dx);
    jacobian->mean_control.resize(dx, du);
    jacobian->var_mean.resize(dx, dx);
    jacobian->var_var.resize(dx, dx);
    jacobian->var_control.resize(dx, du);
  }
  const Vector inv_scale = s.scale.cwiseInverse();
  for (Eigen::Index i = 0; i < dx; ++i) {
    const gp::LocalExpansion e = model.expand_output(i, z);
    const Vector g = e.mean_gradient.head(dx);
    const double out_scale = s.scale[i];
    const double out_scale2 = out_scale * out_scale;
    const Vector weighted = g.cwiseProduct(input_var);
    next.mean[i] = s.mean[i] + out_scale * e.mean;
    next.variance[i] = out_scale2 * (e.variance + g.dot(weighted));
    if (!jacobian)
      continue;
    Vector q = Vector::Zero(dx + du);
    q.head(dx) = weighted;
    const Vector dvar_dz = e.variance_gradient + 2.0 * e.mean_hessian_times(q);
    const Vector dmean_phys = out_scale * e.mean_gradient.cwiseProduct(inv_scale);
    const Vector dvar_phys = out_scale2 * dvar_dz.cwiseProduct(inv_scale);
    jacobian->mean_mean.row(i) = dmean_phys.head(dx).transpose();
    jacobian->mean_control.row(i) = dmean_phys.tail(du).transpose();
    jacobian->var_mean.row(i) = dvar_phys.head(dx).transpose();
    jacobian->var_control.row(i) = dvar_phys.tail(du).transpose();
    jacobian->var_var.row(i) =
        (out_scale2 * g.cwiseProduct(g).cwiseProduct(inv_scale.head(dx)).cwiseProduct(
                          inv_scale.head(dx)))
            .transpose();
  }
  return next;
}

std::vector<StateBelief> rollout(const TransitionModel &model, const StateBelief &initial,
                                 const std::vector<Vector> &controls) {
  if (controls.empty())
    throw std::invalid_argument("rollout: empty control sequence");
  std::vector<StateBelief> beliefs;
  beliefs.reserve(controls.size());
  StateBelief current = initial;
  for (const auto &u : controls) {
    current = propagate(model, current, u);
    beliefs.push_back(current);
  }
  return beliefs;
}

nlohmann::json model_to_json(const GpStateSpaceModel &model) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto &gp : model.outputs())
    outputs.push_back(gp::sparse_to_json(gp));
  return {{"kind", "gp_state_space"},
          {"state_dim", model.state_dim()},
          {"control_dim", model.control_dim()},
          {"stats",
           {{"mean", gp::vector_to_json(model.stats().mean)},
            {"scale", gp::vector_to_json(model.stats().scale)}}},
          {"outputs", outputs}};
}

GpStateSpaceModel model_from_json(const nlohmann::json &j) {
  if (j.at("kind").get<std::string>() != "gp_state_space")
    throw std::invalid_argument("model_from_json: unsupported model kind");
  std::vector<gp::SparseGp> outputs;
  for (const auto &o : j.at("outputs"))
    outputs.push_back(gp::sparse_from_json(o));
  Standardization stats{gp::vector_from_json(j.at("stats").at("mean")),
                        gp::vector_from_json(j.at("stats").at("scale"))};
  return GpStateSpaceModel(std::move(outputs), std::move(stats),
                           j.at("state_dim").get<Eigen::Index>(),
                           j.at("control_dim").get<Eigen::Index>());
}

} // namespace gpmpc::statespace
