//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpmpc/numerics/linalg.hpp"

namespace gpmpc::statespace {

using numerics::Matrix;
using numerics::Vector;

class EmptyInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Measured outputs y[0..T] and applied controls u[0..T-1] of one run.
struct Trajectory {
  std::vector<Vector> outputs;
  std::vector<Vector> controls;
};

/// Affine column map z = (x - mean) / scale.
struct Standardization {
  Vector mean;
  Vector scale;

  Vector apply(const Vector &x) const;
  Vector invert(const Vector &z) const;
  Matrix apply_rows(const Matrix &x) const;
};

struct DatasetOptions {
  /// Scale used for columns whose spread is below `min_spread`; one entry per
  /// input column, or empty for 1.0 everywhere.
  Vector fallback_scale;
  double min_spread = 1e-9;
  /// Optional absolute spread per input column at or below which the column
  /// counts as constant and takes its fallback scale.
  Vector constant_spread;
};

/// Transition data: row r of `inputs` is [y[j], u[j]] and row r of
/// `targets` is y[j+1]. Targets share the statistics of the state columns.
struct TransitionDataset {
  Matrix inputs;
  Matrix targets;
  Standardization stats;
  Eigen::Index state_dim = 0;
  Eigen::Index control_dim = 0;

  Eigen::Index size() const { return inputs.rows(); }
  Matrix standardized_inputs() const;
  /// Column i holds the standardized targets of output i.
  Matrix standardized_targets() const;
  Standardization state_stats() const;
};

Standardization fit_standardization(const Matrix &columns, const DatasetOptions &opts = {});

TransitionDataset build_dataset(const std::vector<Trajectory> &trajectories,
                                const DatasetOptions &opts = {});

/// Writes `<path>` (CSV, one row per transition) and `<path>.stats.json`.
void save_dataset(const TransitionDataset &dataset, const std::filesystem::path &path);
TransitionDataset load_dataset(const std::filesystem::path &path);

} // namespace gpmpc::statespace
