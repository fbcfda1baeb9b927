//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/gp/serialize.hpp"

namespace gpmpc::gp {

nlohmann::json vector_to_json(const Vector &v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const nlohmann::json &j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json matrix_to_json(const Matrix &m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Matrix matrix_from_json(const nlohmann::json &j) {
  if (!j.is_array())
    throw nlohmann::json::type_error::create(302, "matrix must be an array of rows", &j);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j.at(i));
    if (row.size() != cols)
      throw numerics::DimensionMismatch("matrix_from_json: ragged rows");
    m.row(i) = row.transpose();
  }
  return m;
}

nlohmann::json hyperparams_to_json(const Hyperparams &hp) {
  return {{"signal_variance", hp.signal_variance},
          {"sq_lengthscales", vector_to_json(hp.sq_lengthscales)},
          {"noise_variance", hp.noise_variance}};
}

Hyperparams hyperparams_from_json(const nlohmann::json &j) {
  Hyperparams hp;
  hp.signal_variance = j.at("signal_variance").get<double>();
  hp.sq_lengthscales = vector_from_json(j.at("sq_lengthscales"));
  hp.noise_variance = j.at("noise_variance").get<double>();
  hp.validate();
  return hp;
}

nlohmann::json sparse_to_json(const SparseGp &model) {
  return {{"kind", "sparse_vfe_se"},
          {"hyperparams", hyperparams_to_json(model.hyperparams())},
          {"inducing", matrix_to_json(model.inducing())},
          {"weights", vector_to_json(model.weights())},
          {"prior_factor", matrix_to_json(model.prior_factor())},
          {"posterior_factor", matrix_to_json(model.posterior_factor())}};
}

SparseGp sparse_from_json(const nlohmann::json &j) {
  if (j.at("kind").get<std::string>() != "sparse_vfe_se")
    throw std::invalid_argument("sparse_from_json: unsupported model kind");
  return SparseGp(hyperparams_from_json(j.at("hyperparams")), matrix_from_json(j.at("inducing")),
                  vector_from_json(j.at("weights")), matrix_from_json(j.at("prior_factor")),
                  matrix_from_json(j.at("posterior_factor")));
}

} // namespace gpmpc::gp
