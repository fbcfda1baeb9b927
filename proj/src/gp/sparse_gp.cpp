//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/gp/sparse_gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gpmpc/numerics/rng.hpp"

namespace gpmpc::gp {
namespace {

// Relative to the signal variance; keeps K_mm factorizable when inducing
// inputs drift together.
constexpr double kInducingJitter = 1e-10;

struct InducingFactors {
  Matrix kmm;       // without jitter
  Matrix kmn;
  numerics::CholeskyFactor lmm; // of kmm + jitter
  Matrix a;         // L_mm^{-1} K_mn / sigma_n
  numerics::CholeskyFactor lb;  // of I + A A^T
};

InducingFactors factorize(const Hyperparams &hp, const Matrix &inducing,
                          const Matrix &inputs) {
  InducingFactors f;
  f.kmm = kernel_matrix(inducing, inducing, hp);
  f.kmn = kernel_matrix(inducing, inputs, hp);
  f.lmm = numerics::cholesky(f.kmm, kInducingJitter * hp.signal_variance);
  f.a = numerics::solve_lower(f.lmm, f.kmn) / std::sqrt(hp.noise_variance);
  Matrix b = f.a * f.a.transpose();
  b.diagonal().array() += 1.0;
  f.lb = numerics::cholesky(b);
  return f;
}

// L_mm^{-T} X L_mm^{-1}
Matrix sandwich_inverse(const numerics::CholeskyFactor &l, const Matrix &x) {
  const auto lower = l.lower.triangularView<Eigen::Lower>();
  Matrix t = lower.transpose().solve(x);
  return lower.transpose().solve(t.transpose()).transpose();
}

} // namespace

VfeResult vfe_bound(const Hyperparams &hp, const Matrix &inducing,
                    const Matrix &inputs, const Vector &targets) {
  hp.validate();
  if (inputs.rows() != targets.size() || inputs.cols() != hp.input_dim() ||
      inducing.cols() != hp.input_dim())
    throw numerics::DimensionMismatch("vfe_bound: dimension mismatch");
  const Eigen::Index n = inputs.rows();
  const Eigen::Index m = inducing.rows();
  const Eigen::Index d = hp.input_dim();
  const double noise = hp.noise_variance;
  const double beta = 1.0 / noise;

  const InducingFactors f = factorize(hp, inducing, inputs);
  const Vector b = f.kmn * targets;
  const Matrix aat = f.a * f.a.transpose();
  // c = L_B^{-1} L_mm^{-1} b; b^T Sigma^{-1} b = c^T c
  const Vector c = f.lb.lower.triangularView<Eigen::Lower>().solve(
      f.lmm.lower.triangularView<Eigen::Lower>().solve(b));
  const double yy = targets.squaredNorm();
  const double trace_aat = aat.trace();

  VfeResult out;
  out.value = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) -
              0.5 * f.lb.log_determinant() -
              0.5 * static_cast<double>(n) * std::log(noise) - 0.5 * beta * yy +
              0.5 * beta * beta * c.squaredNorm() -
              0.5 * beta * static_cast<double>(n) * hp.signal_variance +
              0.5 * trace_aat;

  // Partial derivatives w.r.t. K_mm, K_mn, and beta.
  const Matrix binv = numerics::inverse_psd(f.lb);
  const Matrix kmm_inv = numerics::inverse_psd(f.lmm);
  const Matrix sigma_inv = sandwich_inverse(f.lmm, binv);
  const Vector v = sigma_inv * b;
  const Vector kv = f.kmn.transpose() * v;
  const Matrix kinv_p_kinv = noise * sandwich_inverse(f.lmm, aat);

  const Matrix g_mm = 0.5 * (kmm_inv - sigma_inv) - 0.5 * beta * beta * v * v.transpose() -
                      0.5 * beta * kinv_p_kinv;
  const Matrix g_mn = beta * (kmm_inv - sigma_inv) * f.kmn +
                      beta * beta * v * (targets - beta * kv).transpose();
  const double tr_sigma_inv_p = noise * (binv * aat).trace();
  const double tr_kmm_inv_p = noise * trace_aat;
  const double dbeta = -0.5 * tr_sigma_inv_p - 0.5 * yy + beta * b.dot(v) -
                       0.5 * beta * beta * kv.squaredNorm() -
                       0.5 * static_cast<double>(n) * hp.signal_variance +
                       0.5 * tr_kmm_inv_p;

  out.hyper_gradient.resize(d + 2);
  out.hyper_gradient[0] = (g_mm.array() * f.kmm.array()).sum() +
                          (g_mn.array() * f.kmn.array()).sum() -
                          0.5 * beta * static_cast<double>(n) * hp.signal_variance;
  out.hyper_gradient[d + 1] = -0.5 * static_cast<double>(n) - beta * dbeta;

  // d k(a, b) / d a = -k(a, b) (a - b) / l^2 per dimension; with W the
  // elementwise products of the partials and the kernel matrices, every
  // dimension reduces to row sums and one product with the input matrix.
  const Matrix wmm = (g_mm.array() * f.kmm.array()).matrix();
  const Matrix wmn = (g_mn.array() * f.kmn.array()).matrix();
  const Vector wmm_rows = wmm.rowwise().sum();
  const Vector wmn_rows = wmn.rowwise().sum();
  const Vector wmn_cols = wmn.colwise().sum().transpose();
  const Matrix wmm_z = wmm * inducing;
  const Matrix wmn_x = wmn * inputs;
  out.inducing_gradient.resize(m, d);
  for (Eigen::Index dim = 0; dim < d; ++dim) {
    const double inv_ls = 1.0 / hp.sq_lengthscales[dim];
    const auto z = inducing.col(dim);
    const auto x = inputs.col(dim);
    // sum_ij W_ij (a_i - b_j)^2 = sum_i a_i^2 r_i - 2 a . (W b) + sum_j b_j^2 c_j
    const double acc_mm = 2.0 * (z.array().square() * wmm_rows.array()).sum() -
                          2.0 * z.dot(wmm_z.col(dim));
    const double acc_mn = (z.array().square() * wmn_rows.array()).sum() -
                          2.0 * z.dot(wmn_x.col(dim)) +
                          (x.array().square() * wmn_cols.array()).sum();
    out.inducing_gradient.col(dim) =
        (-2.0 * (z.cwiseProduct(wmm_rows) - wmm_z.col(dim)) -
         (z.cwiseProduct(wmn_rows) - wmn_x.col(dim))) *
        inv_ls;
    out.hyper_gradient[dim + 1] = 0.5 * (acc_mm + acc_mn) * inv_ls;
  }
  return out;
}

Vector LocalExpansion::mean_hessian_times(const Vector &q) const {
  const Vector projections = scaled_offsets * q;
  Vector out = scaled_offsets.transpose() * weighted_kernel.cwiseProduct(projections);
  out -= weighted_kernel.sum() * inv_sq_lengthscales.cwiseProduct(q);
  return out;
}

SparseGp::SparseGp(Hyperparams hp, Matrix inducing, const Matrix &inputs,
                   const Vector &targets)
    : hp_(std::move(hp)), inducing_(std::move(inducing)) {
  hp_.validate();
  if (inputs.rows() != targets.size() || inputs.cols() != hp_.input_dim() ||
      inducing_.cols() != hp_.input_dim())
    throw numerics::DimensionMismatch("SparseGp: dimension mismatch");
  const InducingFactors f = factorize(hp_, inducing_, inputs);
  const Eigen::Index m = inducing_.rows();
  prior_factor_ = f.lmm.lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(m, m));
  posterior_factor_ = f.lb.lower.triangularView<Eigen::Lower>().solve(prior_factor_);
  weights_ = posterior_factor_.transpose() * (posterior_factor_ * (f.kmn * targets)) /
             hp_.noise_variance;
  inv_sq_lengthscales_ = hp_.sq_lengthscales.cwiseInverse();
}

SparseGp::SparseGp(Hyperparams hp, Matrix inducing, Vector weights, Matrix prior_factor,
                   Matrix posterior_factor)
    : hp_(std::move(hp)), inducing_(std::move(inducing)), weights_(std::move(weights)),
      prior_factor_(std::move(prior_factor)), posterior_factor_(std::move(posterior_factor)) {
  hp_.validate();
  const Eigen::Index m = inducing_.rows();
  if (inducing_.cols() != hp_.input_dim() || weights_.size() != m ||
      prior_factor_.rows() != m || prior_factor_.cols() != m ||
      posterior_factor_.rows() != m || posterior_factor_.cols() != m)
    throw numerics::DimensionMismatch("SparseGp: cache dimension mismatch");
  inv_sq_lengthscales_ = hp_.sq_lengthscales.cwiseInverse();
}

double SparseGp::variance_from(const Vector &pk, const Vector &rk) const {
  const double residual = std::max(0.0, hp_.signal_variance - pk.squaredNorm());
  return clamp_variance(residual + rk.squaredNorm());
}

Prediction SparseGp::predict(const Vector &z) const {
  const Vector k = kernel_vector(inducing_, z, hp_);
  const Vector pk = prior_factor_.triangularView<Eigen::Lower>() * k;
  const Vector rk = posterior_factor_.triangularView<Eigen::Lower>() * k;
  return {k.dot(weights_), variance_from(pk, rk)};
}

Vector SparseGp::mean_gradient(const Vector &z) const {
  return expand(z).mean_gradient;
}

LocalExpansion SparseGp::expand(const Vector &z) const {
  if (z.size() != hp_.input_dim())
    throw numerics::DimensionMismatch("SparseGp: input dimension mismatch");
  const Eigen::Index m = inducing_.rows();
  LocalExpansion e;
  e.inv_sq_lengthscales = inv_sq_lengthscales_;
  e.scaled_offsets.resize(m, z.size());
  Vector k(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::ArrayXd diff = z.array() - inducing_.row(c).transpose().array();
    k[c] = hp_.signal_variance * std::exp(-0.5 * (diff.square() * inv_sq_lengthscales_.array()).sum());
    e.scaled_offsets.row(c) = (diff * inv_sq_lengthscales_.array()).matrix().transpose();
  }
  e.weighted_kernel = weights_.cwiseProduct(k);
  e.mean = e.weighted_kernel.sum();
  // d k_c / dz = -k_c (z - c) / l^2
  e.mean_gradient = -(e.scaled_offsets.transpose() * e.weighted_kernel);
  const Vector pk = prior_factor_.triangularView<Eigen::Lower>() * k;
  const Vector rk = posterior_factor_.triangularView<Eigen::Lower>() * k;
  const Vector ck = prior_factor_.triangularView<Eigen::Lower>().transpose() * pk -
                    posterior_factor_.triangularView<Eigen::Lower>().transpose() * rk;
  e.variance = variance_from(pk, rk);
  e.variance_gradient = 2.0 * (e.scaled_offsets.transpose() * k.cwiseProduct(ck));
  return e;
}

Matrix farthest_point_subset(const Matrix &inputs, Eigen::Index count) {
  const Eigen::Index n = inputs.rows();
  count = std::min(count, n);
  Matrix subset(count, inputs.cols());
  if (count == 0)
    return subset;
  const Eigen::RowVectorXd centroid = inputs.colwise().mean();
  Eigen::Index first = 0;
  (inputs.rowwise() - centroid).rowwise().squaredNorm().minCoeff(&first);
  Vector nearest = (inputs.rowwise() - inputs.row(first)).rowwise().squaredNorm();
  subset.row(0) = inputs.row(first);
  for (Eigen::Index k = 1; k < count; ++k) {
    Eigen::Index next = 0;
    nearest.maxCoeff(&next);
    subset.row(k) = inputs.row(next);
    nearest = nearest.cwiseMin((inputs.rowwise() - inputs.row(next)).rowwise().squaredNorm());
  }
  return subset;
}

SparseGp fit_sparse(const Matrix &inputs, const Vector &targets,
                    const Hyperparams &hp0, const SparseFitOptions &opts) {
  if (opts.restarts < 1)
    throw std::invalid_argument("fit_sparse: restarts must be >= 1");
  if (inputs.rows() != targets.size() || inputs.cols() != hp0.input_dim())
    throw numerics::DimensionMismatch("fit_sparse: dimension mismatch");
  if (inputs.rows() < 1)
    throw std::invalid_argument("fit_sparse: no training data");
  Eigen::Index m = opts.num_inducing;
  if (m > inputs.rows()) {
    spdlog::warn("fit_sparse: {} inducing points requested for {} data points; using {}",
                 m, inputs.rows(), inputs.rows());
    m = inputs.rows();
  }
  const Eigen::Index d = hp0.input_dim();
  const Eigen::Index nh = d + 2;
  const Matrix inducing0 = farthest_point_subset(inputs, m);

  // Packing: [log hyperparameters, inducing inputs row-major].
  const auto hyper_box = Hyperparams::log_bounds(d);
  const bool move_inducing = !opts.freeze_inducing;
  const bool move_hyper = !opts.freeze_hyperparams;
  const Eigen::Index np = (move_hyper ? nh : 0) + (move_inducing ? m * d : 0);
  if (np == 0)
    return SparseGp(hp0, inducing0, inputs, targets);

  auto unpack = [&](const Vector &theta, Hyperparams &hp, Matrix &inducing) {
    hp = move_hyper ? Hyperparams::from_log(theta.head(nh)) : hp0;
    if (move_inducing) {
      const Eigen::Index offset = move_hyper ? nh : 0;
      inducing = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(theta.data() + offset, m, d);
    } else {
      inducing = inducing0;
    }
  };
  auto pack = [&](const Vector &log_hyper, const Matrix &inducing) {
    Vector theta(np);
    if (move_hyper)
      theta.head(nh) = log_hyper;
    if (move_inducing) {
      const Eigen::Index offset = move_hyper ? nh : 0;
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          theta.data() + offset, m, d) = inducing;
    }
    return theta;
  };

  numerics::Box box = numerics::Box::unbounded(np);
  if (move_hyper) {
    box.lower.head(nh) = hyper_box.lower;
    box.upper.head(nh) = hyper_box.upper;
  }

  auto objective = [&](const Vector &theta, Vector &grad) {
    Hyperparams hp;
    Matrix inducing;
    unpack(theta, hp, inducing);
    try {
      const VfeResult r = vfe_bound(hp, inducing, inputs, targets);
      grad.resize(np);
      if (move_hyper)
        grad.head(nh) = -r.hyper_gradient;
      if (move_inducing) {
        const Eigen::Index offset = move_hyper ? nh : 0;
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            grad.data() + offset, m, d) = -r.inducing_gradient;
      }
      return -r.value;
    } catch (const numerics::NotPositiveDefinite &) {
      grad = Vector::Zero(np);
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  numerics::MinimizeOptions optimizer = opts.optimizer;
  if (opts.on_iterate) {
    optimizer.on_iterate = [&](const Vector &theta, double f) {
      Hyperparams hp;
      Matrix inducing;
      unpack(theta, hp, inducing);
      opts.on_iterate(hp, inducing, -f);
    };
  }

  numerics::RngStream rng(opts.seed);
  std::optional<numerics::MinimizeResult> best;
  const Vector log_start = hyper_box.project(hp0.to_log());
  for (int r = 0; r < opts.restarts; ++r) {
    Vector log_hyper = log_start;
    if (r > 0) {
      for (Eigen::Index i = 0; i < log_hyper.size(); ++i)
        log_hyper[i] += opts.perturbation * rng.normal();
      log_hyper = hyper_box.project(log_hyper);
    }
    const Vector theta0 = pack(log_hyper, inducing0);
    if (opts.on_iterate) {
      Vector g;
      const double f0 = objective(theta0, g);
      if (std::isfinite(f0))
        optimizer.on_iterate(theta0, f0);
    }
    try {
      auto result = numerics::minimize(objective, theta0, box, optimizer);
      spdlog::debug("fit_sparse restart {}: bound {:.6g}, {} iterations, {} evaluations, {}", r,
                    -result.value, result.iterations, result.evaluations, result.reason);
      if (!best || result.value < best->value)
        best = std::move(result);
    } catch (const numerics::NonFiniteObjective &e) {
      spdlog::debug("fit_sparse restart {} failed: {}", r, e.what());
    }
    if (!move_hyper)
      break;
  }
  if (!best)
    throw AllRestartsFailed("fit_sparse: every restart failed");
  Hyperparams hp;
  Matrix inducing;
  unpack(best->x, hp, inducing);
  return SparseGp(hp, inducing, inputs, targets);
}

} // namespace gpmpc::gp
