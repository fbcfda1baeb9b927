//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/statespace/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "gpmpc/gp/serialize.hpp"

namespace gpmpc::statespace {

Vector Standardization::apply(const Vector &x) const {
  if (x.size() != mean.size())
    throw numerics::DimensionMismatch("Standardization: dimension mismatch");
  return (x - mean).cwiseQuotient(scale);
}

Vector Standardization::invert(const Vector &z) const {
  if (z.size() != mean.size())
    throw numerics::DimensionMismatch("Standardization: dimension mismatch");
  return z.cwiseProduct(scale) + mean;
}

Matrix Standardization::apply_rows(const Matrix &x) const {
  if (x.cols() != mean.size())
    throw numerics::DimensionMismatch("Standardization: dimension mismatch");
  return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
      .matrix();
}

Standardization fit_standardization(const Matrix &columns, const DatasetOptions &opts) {
  if (columns.rows() == 0)
    throw EmptyInput("fit_standardization: no rows");
  const Eigen::Index d = columns.cols();
  if (opts.fallback_scale.size() != 0 && opts.fallback_scale.size() != d)
    throw numerics::DimensionMismatch(fmt::format(
        "fit_standardization: {} fallback scales for {} columns", opts.fallback_scale.size(), d));
  if (opts.constant_spread.size() != 0 && opts.constant_spread.size() != d)
    throw numerics::DimensionMismatch(fmt::format(
        "fit_standardization: {} constant spreads for {} columns", opts.constant_spread.size(), d));
  Standardization s;
  s.mean = columns.colwise().mean().transpose();
  s.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd =
        std::sqrt((columns.col(j).array() - s.mean[j]).square().sum() /
                  static_cast<double>(columns.rows()));
    const double floor = opts.min_spread * std::max(1.0, std::abs(s.mean[j]));
    const bool constant =
        sd <= floor || (opts.constant_spread.size() != 0 && sd <= opts.constant_spread[j]);
    if (!constant)
      s.scale[j] = sd;
    else
      s.scale[j] = opts.fallback_scale.size() ? opts.fallback_scale[j] : 1.0;
  }
  return s;
}

Matrix TransitionDataset::standardized_inputs() const { return stats.apply_rows(inputs); }

Matrix TransitionDataset::standardized_targets() const {
  return state_stats().apply_rows(targets);
}

Standardization TransitionDataset::state_stats() const {
  return {stats.mean.head(state_dim), stats.scale.head(state_dim)};
}

TransitionDataset build_dataset(const std::vector<Trajectory> &trajectories,
                                const DatasetOptions &opts) {
  Eigen::Index rows = 0;
  Eigen::Index dx = -1, du = -1;
  for (const auto &t : trajectories) {
    if (t.outputs.size() != t.controls.size() + 1)
      throw std::invalid_argument(fmt::format(
          "build_dataset: trajectory has {} outputs for {} controls", t.outputs.size(),
          t.controls.size()));
    for (const auto &y : t.outputs) {
      if (dx < 0)
        dx = y.size();
      if (y.size() != dx)
        throw numerics::DimensionMismatch("build_dataset: inconsistent output dimension");
    }
    for (const auto &u : t.controls) {
      if (du < 0)
        du = u.size();
      if (u.size() != du)
        throw numerics::DimensionMismatch("build_dataset: inconsistent control dimension");
    }
    rows += static_cast<Eigen::Index>(t.controls.size());
  }
  if (rows == 0)
    throw EmptyInput("build_dataset: no transitions");

  TransitionDataset ds;
  ds.state_dim = dx;
  ds.control_dim = du;
  ds.inputs.resize(rows, dx + du);
  ds.targets.resize(rows, dx);
  Eigen::Index r = 0;
  for (const auto &t : trajectories) {
    for (std::size_t j = 0; j < t.controls.size(); ++j, ++r) {
      ds.inputs.row(r).head(dx) = t.outputs[j].transpose();
      ds.inputs.row(r).tail(du) = t.controls[j].transpose();
      ds.targets.row(r) = t.outputs[j + 1].transpose();
    }
  }
  ds.stats = fit_standardization(ds.inputs, opts);
  return ds;
}

void save_dataset(const TransitionDataset &dataset, const std::filesystem::path &path) {
  {
    std::ofstream out(path);
    if (!out)
      throw std::runtime_error(fmt::format("save_dataset: cannot open {}", path.string()));
    std::vector<std::string> header;
    for (Eigen::Index i = 0; i < dataset.state_dim; ++i)
      header.push_back(fmt::format("x{}", i));
    for (Eigen::Index i = 0; i < dataset.control_dim; ++i)
      header.push_back(fmt::format("u{}", i));
    for (Eigen::Index i = 0; i < dataset.state_dim; ++i)
      header.push_back(fmt::format("next_x{}", i));
    out << fmt::format("{}\n", fmt::join(header, ","));
    for (Eigen::Index r = 0; r < dataset.size(); ++r) {
      std::vector<std::string> cells;
      for (Eigen::Index c = 0; c < dataset.inputs.cols(); ++c)
        cells.push_back(fmt::format("{:.17g}", dataset.inputs(r, c)));
      for (Eigen::Index c = 0; c < dataset.targets.cols(); ++c)
        cells.push_back(fmt::format("{:.17g}", dataset.targets(r, c)));
      out << fmt::format("{}\n", fmt::join(cells, ","));
    }
  }
  const nlohmann::json stats = {{"state_dim", dataset.state_dim},
                                {"control_dim", dataset.control_dim},
                                {"mean", gp::vector_to_json(dataset.stats.mean)},
                                {"scale", gp::vector_to_json(dataset.stats.scale)}};
  std::ofstream side(path.string() + ".stats.json");
  side << stats.dump(2) << "\n";
}

TransitionDataset load_dataset(const std::filesystem::path &path) {
  std::ifstream side(path.string() + ".stats.json");
  if (!side)
    throw std::runtime_error(fmt::format("load_dataset: missing stats sidecar for {}", path.string()));
  const auto stats = nlohmann::json::parse(side);
  TransitionDataset ds;
  ds.state_dim = stats.at("state_dim").get<Eigen::Index>();
  ds.control_dim = stats.at("control_dim").get<Eigen::Index>();
  ds.stats.mean = gp::vector_from_json(stats.at("mean"));
  ds.stats.scale = gp::vector_from_json(stats.at("scale"));

  std::ifstream in(path);
  if (!in)
    throw std::runtime_error(fmt::format("load_dataset: cannot open {}", path.string()));
  std::string line;
  std::getline(in, line);
  const Eigen::Index width = 2 * ds.state_dim + ds.control_dim;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(row.size()) != width)
      throw std::runtime_error(fmt::format("load_dataset: {} has a row with {} cells, expected {}",
                                           path.string(), row.size(), width));
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  ds.inputs.resize(n, ds.state_dim + ds.control_dim);
  ds.targets.resize(n, ds.state_dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < ds.inputs.cols(); ++c)
      ds.inputs(r, c) = rows[r][c];
    for (Eigen::Index c = 0; c < ds.state_dim; ++c)
      ds.targets(r, c) = rows[r][ds.inputs.cols() + c];
  }
  return ds;
}

} // namespace gpmpc::statespace
