#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "gpmpc/numerics/finite_difference.hpp"
#include "gpmpc/numerics/rng.hpp"
#include "gpmpc/plant/config.hpp"
#include "gpmpc/statespace/model.hpp"
#include "support/affine_model.hpp"
#include "support/gp_oracles.hpp"

using namespace gpmpc;
using namespace gpmpc::statespace;
using namespace gpmpc::testing;
using numerics::RngStream;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

Trajectory random_trajectory(RngStream &rng, int steps, Eigen::Index dx, Eigen::Index du) {
  Trajectory t;
  for (int j = 0; j <= steps; ++j)
    t.outputs.push_back(random_vector(rng, dx));
  for (int j = 0; j < steps; ++j)
    t.controls.push_back(random_vector(rng, du));
  return t;
}

// Noiseless x+ = 0.9 x + 0.1 u under random excitation.
Trajectory linear_trajectory(RngStream &rng, int steps, double x0) {
  Trajectory t;
  double x = x0;
  t.outputs.push_back(scalar(x));
  for (int j = 0; j < steps; ++j) {
    const double u = 4.0 * rng.uniform() - 2.0;
    x = 0.9 * x + 0.1 * u;
    t.controls.push_back(scalar(u));
    t.outputs.push_back(scalar(x));
  }
  return t;
}

ModelFitOptions quick_fit(int inducing = 10) {
  ModelFitOptions opts;
  opts.num_inducing = inducing;
  opts.restarts = 1;
  opts.seed = 5;
  return opts;
}

Standardization stats_of(std::initializer_list<double> mean, std::initializer_list<double> scale) {
  Standardization s;
  s.mean = Eigen::Map<const Vector>(mean.begin(), static_cast<Eigen::Index>(mean.size()));
  s.scale = Eigen::Map<const Vector>(scale.begin(), static_cast<Eigen::Index>(scale.size()));
  return s;
}

} // namespace

TEST_CASE("build_dataset shapes") {
  RngStream rng(1);
  const auto a = random_trajectory(rng, 3, 2, 1);
  const auto b = random_trajectory(rng, 5, 2, 1);
  const auto one = build_dataset({a});
  CHECK(one.size() == 3);
  CHECK(one.inputs.cols() == 3);
  CHECK(one.targets.rows() == 3);
  CHECK(one.standardized_targets().cols() == 2);
  CHECK(build_dataset({a, b}).size() == 8);
  CHECK(one.inputs.row(1).head(2) == a.outputs[1].transpose());
  CHECK(one.inputs(1, 2) == a.controls[1][0]);
  CHECK(one.targets.row(1) == a.outputs[2].transpose());
}

TEST_CASE("build_dataset rejects malformed input") {
  CHECK_THROWS_AS(build_dataset({}), EmptyInput);
  Trajectory bad;
  bad.outputs = {scalar(0.0), scalar(1.0)};
  bad.controls = {scalar(0.0), scalar(1.0)};
  CHECK_THROWS_AS(build_dataset({bad}), std::invalid_argument);
  Trajectory single;
  single.outputs = {scalar(0.0)};
  CHECK_THROWS_AS(build_dataset({single}), EmptyInput);
}

TEST_CASE("standardized columns have zero mean and unit spread") {
  RngStream rng(2);
  std::vector<Trajectory> ts;
  for (int k = 0; k < 3; ++k) {
    auto t = random_trajectory(rng, 20, 3, 2);
    for (auto &y : t.outputs)
      y = 50.0 * y + Vector::Constant(3, 300.0);
    ts.push_back(t);
  }
  const auto ds = build_dataset(ts);
  const Matrix z = ds.standardized_inputs();
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double mean = z.col(c).mean();
    const double sd = std::sqrt((z.col(c).array() - mean).square().mean());
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(sd - 1.0) <= 1e-9);
  }
  // Targets share the state column statistics.
  const Matrix t = ds.standardized_targets();
  CHECK((t.row(0) - z.row(1).head(3)).norm() <= 1e-12);
}

TEST_CASE("constant columns fall back to the configured scale") {
  Trajectory t;
  for (int j = 0; j <= 4; ++j)
    t.outputs.push_back(scalar(j));
  for (int j = 0; j < 4; ++j)
    t.controls.push_back(scalar(5000.0));
  CHECK(build_dataset({t}).stats.scale[1] == 1.0);
  DatasetOptions opts;
  opts.fallback_scale = Vector::Constant(2, 7500.0);
  const auto ds = build_dataset({t}, opts);
  CHECK(ds.stats.scale[1] == 7500.0);
  CHECK(ds.stats.mean[1] == 5000.0);
  CHECK(ds.stats.scale[0] != 7500.0);
}

TEST_CASE("standardization round trip") {
  RngStream rng(3);
  const Standardization s = stats_of({300.0, -2.0, 1e4}, {15.0, 0.01, 2500.0});
  for (int k = 0; k < 100; ++k) {
    const Vector x = 1e3 * random_vector(rng, 3);
    CHECK((s.invert(s.apply(x)) - x).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.norm()));
    const Vector z = random_vector(rng, 3);
    CHECK((s.apply(s.invert(z)) - z).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("dataset CSV round trip is exact") {
  RngStream rng(4);
  const auto ds = build_dataset({random_trajectory(rng, 12, 2, 1)});
  const auto path = std::filesystem::temp_directory_path() / "gpmpc_dataset_roundtrip.csv";
  save_dataset(ds, path);
  const auto back = load_dataset(path);
  CHECK(back.inputs == ds.inputs);
  CHECK(back.targets == ds.targets);
  CHECK(back.stats.mean == ds.stats.mean);
  CHECK(back.stats.scale == ds.stats.scale);
  CHECK(back.state_dim == 2);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".stats.json");
}

TEST_CASE("fit_model learns a noiseless linear system") {
  RngStream rng(6);
  std::vector<Trajectory> train;
  train.push_back(linear_trajectory(rng, 20, -1.5));
  train.push_back(linear_trajectory(rng, 20, 1.5));
  const auto ds = build_dataset(train);
  CHECK(ds.size() == 40);
  const auto model = fit_model(ds, quick_fit(20));
  CHECK(model.outputs().size() == 1);

  const double range = ds.inputs.col(0).maxCoeff() - ds.inputs.col(0).minCoeff();
  double sq = 0.0;
  const int held_out = 50;
  for (int k = 0; k < held_out; ++k) {
    const double x = ds.inputs.col(0).minCoeff() + range * rng.uniform();
    const double u = 4.0 * rng.uniform() - 2.0;
    const auto b = propagate(model, {scalar(x), scalar(0.0)}, scalar(u));
    sq += std::pow(b.mean[0] - (0.9 * x + 0.1 * u), 2);
  }
  CHECK(std::sqrt(sq / held_out) <= 0.01 * range);
}

TEST_CASE("fit_model on reactor data yields one model per state") {
  const auto cfg = plant::load_plant_config(GPMPC_SOURCE_DIR "/configs/reactor.yaml");
  RngStream rng(7);
  Trajectory t;
  plant::StateVector x = cfg.initial_state;
  t.outputs.push_back(plant::measure(x, cfg.noise, rng));
  for (int j = 0; j < 30; ++j) {
    plant::ControlVector u = cfg.nominal_controls;
    u[plant::kJacketInletTemp] += 5.0 * rng.normal();
    u = cfg.bounds.clamp(u);
    x = plant::step(x, u, cfg.params, cfg.integration);
    t.controls.push_back(u);
    t.outputs.push_back(plant::measure(x, cfg.noise, rng));
  }
  const auto model = fit_model(build_dataset({t}), quick_fit(10));
  CHECK(model.outputs().size() == 9);
  CHECK(model.state_dim() == 9);
  CHECK(model.control_dim() == 3);
}

TEST_CASE("refitting on a superset re-optimizes hyperparameters") {
  RngStream rng(8);
  const auto a = linear_trajectory(rng, 15, 1.0);
  const auto b = linear_trajectory(rng, 15, -1.0);
  const auto small = fit_model(build_dataset({a}), quick_fit());
  const auto large = fit_model(build_dataset({a, b}), quick_fit());
  CHECK(small.outputs()[0].hyperparams().to_log() != large.outputs()[0].hyperparams().to_log());
}

TEST_CASE("perturbing one target channel only changes that output model") {
  RngStream rng(9);
  auto ds = build_dataset({random_trajectory(rng, 25, 3, 1)});
  const auto base = fit_model(ds, quick_fit(8));
  ds.targets.col(1).array() += 0.3 * ds.targets.col(1).array().sin();
  const auto changed = fit_model(ds, quick_fit(8));
  const Vector z = random_vector(rng, 4);
  for (Eigen::Index i : {0, 2}) {
    CHECK(base.outputs()[i].predict(z).mean == changed.outputs()[i].predict(z).mean);
    CHECK(base.outputs()[i].predict(z).variance == changed.outputs()[i].predict(z).variance);
  }
  CHECK(base.outputs()[1].predict(z).mean != changed.outputs()[1].predict(z).mean);
}

TEST_CASE("propagate with zero input variance returns the GP predictive variance") {
  RngStream rng(10);
  const auto ds = build_dataset({random_trajectory(rng, 30, 2, 1)});
  const auto model = fit_model(ds, quick_fit(8));
  const StateBelief b{random_vector(rng, 2), Vector::Zero(2)};
  const Vector u = random_vector(rng, 1);
  const auto next = propagate(model, b, u);
  Vector raw(3);
  raw << b.mean, u;
  const Vector z = ds.stats.apply(raw);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const auto p = model.outputs()[i].predict(z);
    const double s = ds.stats.scale[i];
    CHECK(next.variance[i] == doctest::Approx(s * s * p.variance).epsilon(1e-12));
    CHECK(next.mean[i] == doctest::Approx(ds.stats.mean[i] + s * p.mean).epsilon(1e-12));
  }
  // Input variance only adds a non-negative term.
  const auto wider = propagate(model, {b.mean, Vector::Constant(2, 0.5)}, u);
  CHECK((wider.variance.array() >= next.variance.array()).all());
}

TEST_CASE("propagate is exact for affine dynamics") {
  Matrix a(2, 2), b(2, 1);
  a << 0.9, 0.2, -0.1, 1.05;
  b << 0.5, -2.0;
  const Vector c = (Vector(2) << 3.0, -1.0).finished();
  const Vector q = (Vector(2) << 0.04, 2.5).finished();
  const AffineModel model(a, b, c, q, stats_of({80.0, 10.0, 5.0}, {4.0, 30.0, 2.0}));
  const StateBelief belief{(Vector(2) << 85.0, 40.0).finished(), (Vector(2) << 0.3, 9.0).finished()};
  const Vector u = scalar(1.5);
  const auto next = propagate(model, belief, u);
  // Linear-Gaussian oracle with the cross-covariance dropped afterwards.
  const Vector mean = a * belief.mean + b * u + c;
  const Matrix cov = a * belief.variance.asDiagonal() * a.transpose();
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(std::abs(next.mean[i] - mean[i]) <= 1e-6);
    CHECK(std::abs(next.variance[i] - (cov(i, i) + q[i])) <= 1e-6);
  }
}

TEST_CASE("propagate matches a Monte-Carlo oracle for a 1-D GP") {
  RngStream rng(11);
  std::vector<Trajectory> ts;
  for (int j = 0; j < 80; ++j) {
    const double x = 8.0 * rng.uniform() - 4.0;
    const double u = 2.0 * rng.uniform() - 1.0;
    const double next = 0.9 * x + 0.1 * std::sin(x) + 0.5 * u + 0.02 * rng.normal();
    ts.push_back({{scalar(x), scalar(next)}, {scalar(u)}});
  }
  const auto ds = build_dataset(ts);
  const auto model = fit_model(ds, quick_fit(15));
  const auto &gp = model.outputs()[0];
  const double ell = std::sqrt(gp.hyperparams().sq_lengthscales[0]) * ds.stats.scale[0];
  const double input_sd = std::min(0.3 * ell, 0.6);
  const StateBelief b{scalar(0.0), scalar(input_sd * input_sd)};
  const Vector u = scalar(0.2);
  const auto next = propagate(model, b, u);

  // Law of total variance over sampled inputs.
  RngStream mc(12);
  const int samples = 100000;
  double sum = 0.0, sum_sq = 0.0, sum_var = 0.0;
  for (int k = 0; k < samples; ++k) {
    Vector raw(2);
    raw << b.mean[0] + input_sd * mc.normal(), u[0];
    const auto p = gp.predict(ds.stats.apply(raw));
    const double s = ds.stats.scale[0];
    const double m = ds.stats.mean[0] + s * p.mean;
    sum += m;
    sum_sq += m * m;
    sum_var += s * s * p.variance;
  }
  const double mean = sum / samples;
  const double var = sum_sq / samples - mean * mean + sum_var / samples;
  CHECK(std::abs(next.variance[0] - var) <= 0.05 * var);
}

TEST_CASE("step Jacobian matches central differences") {
  RngStream rng(13);
  const auto ds = build_dataset({random_trajectory(rng, 40, 3, 2)});
  const auto model = fit_model(ds, quick_fit(8));
  for (int trial = 0; trial < 5; ++trial) {
    const StateBelief b{random_vector(rng, 3), (0.2 * random_vector(rng, 3)).cwiseAbs()};
    const Vector u = random_vector(rng, 2);
    StepJacobian jac;
    propagate(model, b, u, &jac);
    for (Eigen::Index i = 0; i < 3; ++i) {
      auto component = [&](const Vector &mean, const Vector &var, const Vector &ctrl, bool want_var) {
        const auto n = propagate(model, {mean, var}, ctrl);
        return want_var ? n.variance[i] : n.mean[i];
      };
      for (bool want_var : {false, true}) {
        const Vector fd_mean = numerics::fd_gradient(
            [&](const Vector &m) { return component(m, b.variance, u, want_var); }, b.mean);
        const Vector fd_ctrl = numerics::fd_gradient(
            [&](const Vector &c) { return component(b.mean, b.variance, c, want_var); }, u);
        const Matrix &jm = want_var ? jac.var_mean : jac.mean_mean;
        const Matrix &ju = want_var ? jac.var_control : jac.mean_control;
        CHECK(relative_error(jm.row(i).transpose(), fd_mean) <= 1e-5);
        CHECK(relative_error(ju.row(i).transpose(), fd_ctrl) <= 1e-5);
      }
      const Vector fd_var = numerics::fd_gradient(
          [&](const Vector &v) { return component(b.mean, v, u, true); }, b.variance);
      CHECK(relative_error(jac.var_var.row(i).transpose(), fd_var) <= 1e-5);
    }
  }
}

TEST_CASE("rollout of length one equals a single propagate") {
  const AffineModel model(Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 0.2),
                          scalar(0.1), scalar(0.05), stats_of({0.0, 0.0}, {1.0, 1.0}));
  const StateBelief b{scalar(1.0), scalar(0.2)};
  const auto single = propagate(model, b, scalar(0.5));
  const auto seq = rollout(model, b, {scalar(0.5)});
  REQUIRE(seq.size() == 1);
  CHECK(seq[0].mean == single.mean);
  CHECK(seq[0].variance == single.variance);
  CHECK_THROWS_AS(rollout(model, b, {}), std::invalid_argument);
}

TEST_CASE("identity-mean GP rollout variance grows as a Monte-Carlo rollout") {
  RngStream rng(14);
  std::vector<Trajectory> ts;
  for (int j = 0; j < 40; ++j) {
    const double x = 6.0 * rng.uniform() - 3.0;
    ts.push_back({{scalar(x), scalar(x + 0.1 * rng.normal())}, {scalar(rng.normal())}});
  }
  const auto ds = build_dataset(ts);
  const auto model = fit_model(ds, quick_fit(15));
  const StateBelief b{scalar(0.5), scalar(0.0)};
  std::vector<Vector> controls(6, scalar(0.0));
  const auto beliefs = rollout(model, b, controls);
  for (std::size_t j = 1; j < beliefs.size(); ++j)
    CHECK(beliefs[j].variance[0] >= beliefs[j - 1].variance[0]);

  // Sample trajectories through the GP predictive distribution.
  RngStream mc(15);
  const int samples = 20000;
  std::vector<double> sum(controls.size(), 0.0), sum_sq(controls.size(), 0.0);
  const double s = ds.stats.scale[0];
  for (int k = 0; k < samples; ++k) {
    double state = b.mean[0];
    for (std::size_t j = 0; j < controls.size(); ++j) {
      Vector raw(2);
      raw << state, 0.0;
      const auto p = model.outputs()[0].predict(ds.stats.apply(raw));
      state = ds.stats.mean[0] + s * (p.mean + std::sqrt(p.variance) * mc.normal());
      sum[j] += state;
      sum_sq[j] += state * state;
    }
  }
  for (std::size_t j = 0; j < controls.size(); ++j) {
    const double mean = sum[j] / samples;
    const double var = sum_sq[j] / samples - mean * mean;
    CHECK(beliefs[j].variance[0] == doctest::Approx(var).epsilon(0.1));
  }
}

TEST_CASE("rollout is deterministic and survives a model round trip") {
  RngStream rng(16);
  const auto ds = build_dataset({random_trajectory(rng, 30, 2, 1)});
  const auto model = fit_model(ds, quick_fit(8));
  const auto restored = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
  const StateBelief b{random_vector(rng, 2), Vector::Constant(2, 0.1)};
  std::vector<Vector> controls;
  for (int j = 0; j < 5; ++j)
    controls.push_back(random_vector(rng, 1));
  const auto r1 = rollout(model, b, controls);
  const auto r2 = rollout(model, b, controls);
  const auto r3 = rollout(restored, b, controls);
  for (std::size_t j = 0; j < controls.size(); ++j) {
    CHECK(r1[j].mean == r2[j].mean);
    CHECK(r1[j].variance == r2[j].variance);
    CHECK(r1[j].mean == r3[j].mean);
    CHECK(r1[j].variance == r3[j].variance);
  }
}
