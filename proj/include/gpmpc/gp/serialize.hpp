//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <json.hpp>

#include "gpmpc/gp/sparse_gp.hpp"

namespace gpmpc::gp {

nlohmann::json hyperparams_to_json(const Hyperparams &hp);
Hyperparams hyperparams_from_json(const nlohmann::json &j);

/// Hyperparameters, inducing inputs and prediction caches. Doubles are
/// written in shortest round-trip form, so a restored model predicts
/// bit-identically.
nlohmann::json sparse_to_json(const SparseGp &model);
SparseGp sparse_from_json(const nlohmann::json &j);

nlohmann::json matrix_to_json(const Matrix &m);
Matrix matrix_from_json(const nlohmann::json &j);
nlohmann::json vector_to_json(const Vector &v);
Vector vector_from_json(const nlohmann::json &j);

} // namespace gpmpc::gp
