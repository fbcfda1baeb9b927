//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmpc/controller/reactor_ocp.hpp"
#include "gpmpc/learner/batch.hpp"
#include "gpmpc/statespace/model.hpp"

namespace gpmpc::learner {

enum class InitialGuess { kNominal, kMidpoint };

std::string to_string(InitialGuess guess);
InitialGuess parse_initial_guess(const std::string &text);

/// First-step control guess: the nominal controls or the centre of the box.
Vector initial_move(const plant::PlantConfig &config, InitialGuess guess);

struct LearningConfig {
  plant::PlantConfig plant;
  controller::ObjectiveKind objective = controller::ObjectiveKind::kTracking;
  controller::ChanceMode chance_mode = controller::ChanceMode::kChance;
  controller::ReactorOcpSettings ocp;
  statespace::ModelFitOptions fit; ///< `seed` is replaced per batch
  double pi_k_p = 114.0;
  double pi_k_i = 0.3;
  /// Standardization scale of a control column that is constant in the data,
  /// as a fraction of the actuator range.
  double constant_control_scale = 1.0;
  /// A control column whose spread is at most this fraction of the actuator
  /// range counts as constant.
  double constant_control_spread = 0.01;
  /// Decision guess of the first solve in every batch.
  InitialGuess initial_guess = InitialGuess::kNominal;
  int num_batches = 10;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds{0};
};

/// Random streams of one seed. Noise and fit streams are independent of the
/// objective and chance mode, so runs that differ only in the controller
/// see identical measurement noise.
struct SeedStreams {
  std::uint64_t base = 0;

  static SeedStreams for_seed(std::uint64_t master_seed, std::uint64_t seed);
  numerics::RngStream noise(int batch) const;
  std::uint64_t fit_seed(int batch) const;
};

/// Everything the loop knows after finishing batch B (B = 0 is the PI batch;
/// `model` is null there).
struct BatchEvent {
  std::uint64_t seed = 0;
  int batch = 0;
  const BatchRecord *record = nullptr;
  const MetricRecord *metrics = nullptr;
  const statespace::TransitionDataset *dataset = nullptr; ///< D_B
  const statespace::GpStateSpaceModel *model = nullptr;   ///< fitted on D_{B-1}
  const std::string *solver_log = nullptr;                ///< JSON lines
};

using BatchObserver = std::function<void(const BatchEvent &)>;

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MetricRecord> metrics; ///< one per completed batch, B = 0 first
  bool ok = true;
  std::string error;
};

struct Percentiles {
  double p5 = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

struct AggregateRecord {
  int batch = 0;
  int num_seeds = 0;
  Percentiles rmse;
  Percentiles final_product;
  Percentiles product_gain;
  Percentiles mean_violation;
  Percentiles max_band_violation;
  Percentiles max_adiabatic_violation;
};

struct LearningResult {
  std::vector<SeedResult> seeds;
  std::vector<AggregateRecord> aggregate;

  bool all_ok() const;
};

/// Standardization options for reactor transitions: constant state columns
/// scale by 1, constant control columns by `scale_fraction` of the actuator
/// range, and a control column counts as constant when its spread is at most
/// `spread_fraction` of that range.
statespace::DatasetOptions dataset_options(const plant::PlantConfig &config,
                                           double scale_fraction = 1.0,
                                           double spread_fraction = 0.01);

statespace::TransitionDataset make_dataset(const std::vector<statespace::Trajectory> &batches,
                                           const LearningConfig &config);

/// One closed-loop batch under MPC on the given prediction model. The solver
/// log (JSON lines) is appended to `solver_log` when non-null.
BatchRecord run_mpc_batch(const plant::PlantConfig &config,
                          std::shared_ptr<const controller::PredictiveModel> model,
                          const controller::OcpSpec &spec, const Vector &first_guess,
                          numerics::RngStream &noise, std::string *solver_log = nullptr);

/// Full-model MPC benchmark on the batch-0 noise stream of `seed`.
BatchRecord run_full_model_benchmark(const LearningConfig &config, std::uint64_t seed,
                                     std::string *solver_log = nullptr);

/// PI benchmark on the batch-0 noise stream of `seed` (identical to the
/// learning loop's seed batch).
BatchRecord run_pi_benchmark(const LearningConfig &config, std::uint64_t seed);

/// The learning loop for one seed. Failures throw.
std::vector<MetricRecord> run_seed(const LearningConfig &config, std::uint64_t seed,
                                   const BatchObserver &observer = {});

/// All seeds, up to `jobs` in parallel. A failing seed is recorded in its
/// SeedResult and does not stop the others. The observer may be called from
/// several threads at once.
LearningResult run_learning(const LearningConfig &config, int jobs = 1,
                            const BatchObserver &observer = {});

/// Linear-interpolation percentile of unsorted values, q in [0, 100].
double percentile(std::vector<double> values, double q);

std::vector<AggregateRecord> aggregate(const std::vector<SeedResult> &seeds);

nlohmann::json metric_to_json(const MetricRecord &m);
nlohmann::json metrics_to_json(const LearningConfig &config, const LearningResult &result);

} // namespace gpmpc::learner
