//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "gpmpc/controller/mpc.hpp"
#include "gpmpc/controller/predictive_model.hpp"
#include "gpmpc/learner/output.hpp"

namespace gpmpc::cli {
namespace {

using numerics::Vector;

std::filesystem::path resolve_out(ExperimentConfig &config, const RunOptions &options) {
  if (!options.out.empty())
    config.output_dir = std::filesystem::absolute(options.out).lexically_normal();
  if (config.output_dir.empty())
    throw ExperimentError("no output directory: set output_dir or pass --out");
  if (options.seed_override)
    config.seeds = {*options.seed_override};
  return config.output_dir;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct LoggedBatch {
  std::vector<Vector> measurements;
  std::vector<Vector> controls;
};

LoggedBatch read_trajectory(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error(fmt::format("missing trajectory file {}", path.string()));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ','))
      header.push_back(cell);
  }
  std::vector<int> y_cols, u_cols;
  for (int i = 0; i < plant::kNumStates; ++i) {
    const auto it = std::find(header.begin(), header.end(),
                              fmt::format("y_{}", plant::state_name(i)));
    if (it == header.end())
      throw std::runtime_error(fmt::format("{}: no measurement column for {}", path.string(),
                                           plant::state_name(i)));
    y_cols.push_back(static_cast<int>(it - header.begin()));
  }
  for (int i = 0; i < plant::kNumControls; ++i) {
    const auto it = std::find(header.begin(), header.end(), plant::control_name(i));
    if (it == header.end())
      throw std::runtime_error(fmt::format("{}: no control column for {}", path.string(),
                                           plant::control_name(i)));
    u_cols.push_back(static_cast<int>(it - header.begin()));
  }
  LoggedBatch b;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    cells.resize(header.size());
    Vector y(plant::kNumStates);
    for (int i = 0; i < plant::kNumStates; ++i)
      y[i] = std::strtod(cells[y_cols[i]].c_str(), nullptr);
    b.measurements.push_back(y);
    if (!cells[u_cols[0]].empty()) {
      Vector u(plant::kNumControls);
      for (int i = 0; i < plant::kNumControls; ++i)
        u[i] = std::strtod(cells[u_cols[i]].c_str(), nullptr);
      b.controls.push_back(u);
    }
  }
  return b;
}

} // namespace

std::filesystem::path RunLayout::seed_dir(std::uint64_t seed) const {
  return root / fmt::format("seed_{}", seed);
}
std::filesystem::path RunLayout::trajectory(std::uint64_t seed, int batch) const {
  return seed_dir(seed) / fmt::format("batch_{:02d}.csv", batch);
}
std::filesystem::path RunLayout::model(std::uint64_t seed, int batch) const {
  return seed_dir(seed) / fmt::format("model_{:02d}.json", batch);
}
std::filesystem::path RunLayout::solver_log(std::uint64_t seed, int batch) const {
  return seed_dir(seed) / fmt::format("solver_{:02d}.jsonl", batch);
}
std::filesystem::path RunLayout::benchmark_trajectory(std::uint64_t seed,
                                                      const std::string &which) const {
  return seed_dir(seed) / fmt::format("benchmark_{}.csv", which);
}
std::filesystem::path RunLayout::benchmark_metrics(const std::string &which) const {
  return root / fmt::format("benchmark_{}.json", which);
}

int cmd_run(ExperimentConfig config, const RunOptions &options, std::ostream &err) {
  const RunLayout layout{resolve_out(config, options)};
  const auto learning = to_learning_config(config);
  learner::write_atomic(layout.manifest(), experiment_to_yaml(config));

  const auto observer = [&](const learner::BatchEvent &e) {
    learner::write_trajectory_csv(*e.record, learning.plant, layout.trajectory(e.seed, e.batch));
    if (e.model)
      learner::write_atomic(layout.model(e.seed, e.batch),
                            statespace::model_to_json(*e.model).dump());
    if (e.solver_log)
      learner::write_atomic(layout.solver_log(e.seed, e.batch), *e.solver_log);
  };
  const auto result = learner::run_learning(learning, options.jobs, observer);
  learner::write_atomic(layout.metrics(), learner::metrics_to_json(learning, result).dump(2) + "\n");
  int failed = 0;
  for (const auto &s : result.seeds)
    if (!s.ok) {
      ++failed;
      err << fmt::format("seed {} failed after {} batches: {}\n", s.seed, s.metrics.size(),
                         s.error);
    }
  if (failed)
    err << fmt::format("{} of {} seeds failed; partial results in {}\n", failed,
                       result.seeds.size(), layout.root.string());
  return failed ? 1 : 0;
}

int cmd_benchmark(ExperimentConfig config, const std::string &which, const RunOptions &options,
                  std::ostream &err) {
  if (which != "pi" && which != "full-model") {
    err << fmt::format("unknown benchmark '{}': expected pi or full-model\n", which);
    return 2;
  }
  const RunLayout layout{resolve_out(config, options)};
  const auto learning = to_learning_config(config);
  learner::write_atomic(layout.manifest(), experiment_to_yaml(config));

  nlohmann::json seeds = nlohmann::json::array();
  int failed = 0;
  for (const auto seed : config.seeds) {
    try {
      std::string log;
      const auto batch = which == "pi" ? learner::run_pi_benchmark(learning, seed)
                                       : learner::run_full_model_benchmark(learning, seed, &log);
      learner::write_trajectory_csv(batch, learning.plant,
                                    layout.benchmark_trajectory(seed, which));
      if (!log.empty())
        learner::write_atomic(layout.seed_dir(seed) / fmt::format("benchmark_{}_solver.jsonl", which),
                              log);
      const auto m = learner::compute_metrics(batch, learning.plant.constraints, 0);
      spdlog::info("benchmark {} seed {}: rmse {:.4f} degC, final m_P {:.1f} kg", which, seed,
                   m.rmse, m.final_product);
      seeds.push_back({{"seed", seed}, {"ok", true}, {"record", learner::metric_to_json(m)}});
    } catch (const std::exception &e) {
      ++failed;
      err << fmt::format("benchmark {} seed {} failed: {}\n", which, seed, e.what());
      seeds.push_back({{"seed", seed}, {"ok", false}, {"error", e.what()}});
    }
  }
  const nlohmann::json doc = {{"benchmark", which},
                              {"objective", controller::to_string(learning.objective)},
                              {"chance_mode", controller::to_string(learning.chance_mode)},
                              {"seeds", seeds}};
  learner::write_atomic(layout.benchmark_metrics(which), doc.dump(2) + "\n");
  return failed ? 1 : 0;
}

int cmd_replay(const std::filesystem::path &manifest, std::ostream &out, std::ostream &err) {
  const auto config = load_experiment(manifest);
  const RunLayout layout{std::filesystem::absolute(manifest).parent_path()};
  const auto learning = to_learning_config(config);
  const auto spec = controller::make_reactor_ocp(learning.plant, learning.objective,
                                                 learning.chance_mode, learning.ocp);
  const Vector first_guess = learner::initial_move(learning.plant, learning.initial_guess);
  int batches = 0, steps = 0;
  for (const auto seed : config.seeds) {
    for (int b = 1; b <= config.num_batches; ++b) {
      const auto model_path = layout.model(seed, b);
      if (!std::filesystem::exists(model_path)) {
        err << fmt::format("missing model file {}\n", model_path.string());
        return 1;
      }
      LoggedBatch logged;
      std::shared_ptr<const statespace::GpStateSpaceModel> model;
      try {
        model = std::make_shared<const statespace::GpStateSpaceModel>(
            statespace::model_from_json(nlohmann::json::parse(read_file(model_path))));
        logged = read_trajectory(layout.trajectory(seed, b));
      } catch (const std::exception &e) {
        err << fmt::format("seed {} batch {}: {}\n", seed, b, e.what());
        return 1;
      }
      controller::MpcController mpc(std::make_shared<controller::GpBackend>(model), spec,
                                    first_guess);
      for (std::size_t l = 0; l < logged.controls.size(); ++l) {
        const Vector u = mpc.step(logged.measurements[l]);
        if (u != logged.controls[l]) {
          err << fmt::format("seed {} batch {}: first divergent step {}: logged [{:.17g}], "
                             "replayed [{:.17g}]\n",
                             seed, b, l, fmt::join(logged.controls[l], ", "),
                             fmt::join(u, ", "));
          return 1;
        }
        ++steps;
      }
      ++batches;
    }
  }
  out << fmt::format("replay ok: {} batches, {} steps reproduced bit for bit\n", batches, steps);
  return 0;
}

} // namespace gpmpc::cli
