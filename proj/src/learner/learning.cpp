//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/learner/learning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "gpmpc/controller/mpc.hpp"
#include "gpmpc/controller/predictive_model.hpp"

namespace gpmpc::learner {
namespace {

constexpr std::uint64_t kNoiseStream = 0;
constexpr std::uint64_t kFitStream = 1;

Vector to_dynamic(const plant::StateVector &y) { return Vector(y); }

} // namespace

SeedStreams SeedStreams::for_seed(std::uint64_t master_seed, std::uint64_t seed) {
  return {numerics::RngStream::derive(master_seed, seed).seed()};
}

numerics::RngStream SeedStreams::noise(int batch) const {
  return numerics::RngStream::derive(numerics::RngStream::derive(base, kNoiseStream).seed(),
                                     static_cast<std::uint64_t>(batch));
}

std::uint64_t SeedStreams::fit_seed(int batch) const {
  return numerics::RngStream::derive(numerics::RngStream::derive(base, kFitStream).seed(),
                                     static_cast<std::uint64_t>(batch))
      .seed();
}

bool LearningResult::all_ok() const {
  return std::all_of(seeds.begin(), seeds.end(), [](const SeedResult &s) { return s.ok; });
}

std::string to_string(InitialGuess guess) {
  return guess == InitialGuess::kNominal ? "nominal" : "midpoint";
}

InitialGuess parse_initial_guess(const std::string &text) {
  if (text == "nominal")
    return InitialGuess::kNominal;
  if (text == "midpoint")
    return InitialGuess::kMidpoint;
  throw std::invalid_argument("initial guess must be nominal or midpoint, got '" + text + "'");
}

Vector initial_move(const plant::PlantConfig &config, InitialGuess guess) {
  if (guess == InitialGuess::kNominal)
    return config.nominal_controls;
  return 0.5 * (config.bounds.lower + config.bounds.upper);
}

statespace::DatasetOptions dataset_options(const plant::PlantConfig &config,
                                           double scale_fraction, double spread_fraction) {
  const int d = plant::kNumStates + plant::kNumControls;
  statespace::DatasetOptions opts;
  opts.fallback_scale = Vector::Ones(d);
  opts.constant_spread = Vector::Zero(d);
  for (int j = 0; j < plant::kNumControls; ++j) {
    const double range = config.bounds.upper[j] - config.bounds.lower[j];
    if (range <= 0.0)
      continue;
    opts.fallback_scale[plant::kNumStates + j] = scale_fraction * range;
    opts.constant_spread[plant::kNumStates + j] = spread_fraction * range;
  }
  return opts;
}

statespace::TransitionDataset make_dataset(const std::vector<statespace::Trajectory> &batches,
                                           const LearningConfig &config) {
  return statespace::build_dataset(
      batches, dataset_options(config.plant, config.constant_control_scale,
                               config.constant_control_spread));
}

BatchRecord run_mpc_batch(const plant::PlantConfig &config,
                          std::shared_ptr<const controller::PredictiveModel> model,
                          const controller::OcpSpec &spec, const Vector &first_guess,
                          numerics::RngStream &noise, std::string *solver_log) {
  controller::MpcController mpc(std::move(model), spec, first_guess);
  std::ostringstream log;
  if (solver_log)
    mpc.set_log(&log);
  BatchRecord rec = run_batch(
      config,
      [&](const plant::StateVector &y) {
        return plant::ControlVector(mpc.step(to_dynamic(y)));
      },
      noise);
  rec.solver_failures = mpc.failures();
  if (solver_log)
    *solver_log += log.str();
  return rec;
}

BatchRecord run_full_model_benchmark(const LearningConfig &config, std::uint64_t seed,
                                     std::string *solver_log) {
  auto noise = SeedStreams::for_seed(config.master_seed, seed).noise(0);
  auto model = std::make_shared<controller::FullModelBackend>(config.plant.params,
                                                              config.plant.integration);
  const auto spec = controller::make_reactor_ocp(config.plant, config.objective,
                                                 config.chance_mode, config.ocp);
  return run_mpc_batch(config.plant, model, spec,
                       initial_move(config.plant, config.initial_guess), noise, solver_log);
}

BatchRecord run_pi_benchmark(const LearningConfig &config, std::uint64_t seed) {
  auto noise = SeedStreams::for_seed(config.master_seed, seed).noise(0);
  return run_pi_batch(config.plant, pi_settings_for(config.plant, config.pi_k_p, config.pi_k_i),
                      noise);
}

std::vector<MetricRecord> run_seed(const LearningConfig &config, std::uint64_t seed,
                                   const BatchObserver &observer) {
  if (config.num_batches < 0)
    throw std::invalid_argument("num_batches must be non-negative");
  const auto streams = SeedStreams::for_seed(config.master_seed, seed);
  const auto spec = controller::make_reactor_ocp(config.plant, config.objective,
                                                 config.chance_mode, config.ocp);
  const Vector first_guess = initial_move(config.plant, config.initial_guess);
  std::vector<statespace::Trajectory> trajectories;
  std::vector<MetricRecord> metrics;

  auto finish = [&](int b, const BatchRecord &rec, const statespace::GpStateSpaceModel *model,
                    const std::string *log) {
    trajectories.push_back(rec.trajectory());
    metrics.push_back(compute_metrics(rec, config.plant.constraints, b));
    const auto &m = metrics.back();
    spdlog::info("seed {} batch {}: rmse {:.4f} degC, final m_P {:.1f} kg, mean violation "
                 "{:.4g} degC, solver failures {}",
                 seed, b, m.rmse, m.final_product, m.mean_violation, m.solver_failures);
    if (observer) {
      const auto dataset = make_dataset(trajectories, config);
      observer(BatchEvent{seed, b, &rec, &m, &dataset, model, log});
    }
  };

  {
    auto noise = streams.noise(0);
    const BatchRecord pi = run_pi_batch(
        config.plant, pi_settings_for(config.plant, config.pi_k_p, config.pi_k_i), noise);
    finish(0, pi, nullptr, nullptr);
  }

  for (int b = 1; b <= config.num_batches; ++b) {
    const auto dataset = make_dataset(trajectories, config);
    statespace::ModelFitOptions fit = config.fit;
    fit.seed = streams.fit_seed(b);
    auto model = std::make_shared<const statespace::GpStateSpaceModel>(
        statespace::fit_model(dataset, fit));
    auto backend = std::make_shared<const controller::GpBackend>(model);
    auto noise = streams.noise(b);
    std::string log;
    const BatchRecord rec =
        run_mpc_batch(config.plant, backend, spec, first_guess, noise,
                      observer ? &log : nullptr);
    finish(b, rec, model.get(), observer ? &log : nullptr);
  }
  return metrics;
}

LearningResult run_learning(const LearningConfig &config, int jobs,
                            const BatchObserver &observer) {
  if (config.seeds.empty())
    throw std::invalid_argument("run_learning: no seeds");
  LearningResult result;
  result.seeds.resize(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < config.seeds.size(); k = next++) {
      SeedResult &out = result.seeds[k];
      out.seed = config.seeds[k];
      try {
        out.metrics = run_seed(config, out.seed, observer);
      } catch (const std::exception &e) {
        out.ok = false;
        out.error = e.what();
        spdlog::error("seed {} failed: {}", out.seed, e.what());
      }
    }
  };
  const int threads =
      std::clamp(jobs, 1, static_cast<int>(config.seeds.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }
  result.aggregate = aggregate(result.seeds);
  return result;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0))
    throw std::invalid_argument("percentile outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<AggregateRecord> aggregate(const std::vector<SeedResult> &seeds) {
  std::size_t batches = 0;
  for (const auto &s : seeds)
    batches = std::max(batches, s.metrics.size());
  std::vector<AggregateRecord> out;
  for (std::size_t b = 0; b < batches; ++b) {
    std::vector<const MetricRecord *> rows;
    for (const auto &s : seeds)
      if (b < s.metrics.size())
        rows.push_back(&s.metrics[b]);
    auto band = [&](double MetricRecord::*field) {
      std::vector<double> v;
      for (const auto *r : rows)
        v.push_back(r->*field);
      return Percentiles{percentile(v, 5.0), percentile(v, 50.0), percentile(v, 95.0)};
    };
    AggregateRecord a;
    a.batch = static_cast<int>(b);
    a.num_seeds = static_cast<int>(rows.size());
    a.rmse = band(&MetricRecord::rmse);
    a.final_product = band(&MetricRecord::final_product);
    a.product_gain = band(&MetricRecord::product_gain);
    a.mean_violation = band(&MetricRecord::mean_violation);
    a.max_band_violation = band(&MetricRecord::max_band_violation);
    a.max_adiabatic_violation = band(&MetricRecord::max_adiabatic_violation);
    out.push_back(a);
  }
  return out;
}

nlohmann::json metric_to_json(const MetricRecord &m) {
  return {{"batch", m.batch},
          {"rmse_degC", m.rmse},
          {"final_m_P_kg", m.final_product},
          {"m_P_gain_kg", m.product_gain},
          {"mean_violation_degC", m.mean_violation},
          {"max_band_violation_degC", m.max_band_violation},
          {"max_adiabatic_violation_degC", m.max_adiabatic_violation},
          {"second_half_median_T_R_degC", m.second_hour_median_tr},
          {"solver_failures", m.solver_failures}};
}

namespace {
nlohmann::json percentiles_to_json(const Percentiles &p) {
  return {{"p5", p.p5}, {"median", p.median}, {"p95", p.p95}};
}
} // namespace

nlohmann::json metrics_to_json(const LearningConfig &config, const LearningResult &result) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto &s : result.seeds) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto &m : s.metrics)
      records.push_back(metric_to_json(m));
    nlohmann::json entry = {{"seed", s.seed}, {"ok", s.ok}, {"records", records}};
    if (!s.ok)
      entry["error"] = s.error;
    seeds.push_back(entry);
  }
  nlohmann::json agg = nlohmann::json::array();
  for (const auto &a : result.aggregate)
    agg.push_back({{"batch", a.batch},
                   {"num_seeds", a.num_seeds},
                   {"rmse_degC", percentiles_to_json(a.rmse)},
                   {"final_m_P_kg", percentiles_to_json(a.final_product)},
                   {"m_P_gain_kg", percentiles_to_json(a.product_gain)},
                   {"mean_violation_degC", percentiles_to_json(a.mean_violation)},
                   {"max_band_violation_degC", percentiles_to_json(a.max_band_violation)},
                   {"max_adiabatic_violation_degC",
                    percentiles_to_json(a.max_adiabatic_violation)}});
  return {{"objective", controller::to_string(config.objective)},
          {"chance_mode", controller::to_string(config.chance_mode)},
          {"num_batches", config.num_batches},
          {"seeds", seeds},
          {"aggregate", agg}};
}

} // namespace gpmpc::learner
