//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/cli/experiment.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "gpmpc/plant/config.hpp"

namespace gpmpc::cli {
namespace {

class Fields {
public:
  Fields(const YAML::Node &node, std::string prefix, const std::string &origin)
      : node_(node), prefix_(std::move(prefix)), origin_(origin) {}

  Fields section(const std::string &key) const {
    const YAML::Node child = node_[key];
    if (!child)
      return Fields(YAML::Node(YAML::NodeType::Map), name(key), origin_);
    if (!child.IsMap())
      fail(key, "expected a mapping", child);
    return Fields(child, name(key), origin_);
  }

  template <typename T> void read(const std::string &key, T &out, const char *what) const {
    const YAML::Node child = node_[key];
    if (!child)
      return;
    try {
      out = child.as<T>();
    } catch (const YAML::Exception &) {
      fail(key, fmt::format("expected {}", what), child);
    }
  }

  void number(const std::string &key, double &out) const { read(key, out, "a number"); }
  void integer(const std::string &key, int &out) const { read(key, out, "an integer"); }

  template <typename Parse> auto word(const std::string &key, Parse parse) const {
    const YAML::Node child = node_[key];
    std::string text;
    read(key, text, "a string");
    try {
      return parse(text);
    } catch (const std::invalid_argument &e) {
      fail(key, e.what(), child);
    }
  }

  const YAML::Node &node() const { return node_; }
  YAML::Node child(const std::string &key) const { return node_[key]; }

  [[noreturn]] void fail(const std::string &key, const std::string &what,
                         const YAML::Node &at = YAML::Node()) const {
    const int line = (at.IsDefined() && !at.IsNull() ? at.Mark().line : node_.Mark().line) + 1;
    throw ExperimentError(
        fmt::format("{}:{}: {}: field '{}'", origin_, std::max(line, 1), what, name(key)));
  }

private:
  std::string name(const std::string &key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  YAML::Node node_;
  std::string prefix_;
  const std::string &origin_;
};

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &text) {
  std::filesystem::path p(text);
  if (p.is_relative())
    p = base / p;
  return p.lexically_normal();
}

std::string quoted(const std::filesystem::path &p) { return nlohmann::json(p.string()).dump(); }

} // namespace

ExperimentConfig parse_experiment(const std::string &text, const std::string &origin,
                                  const std::filesystem::path &base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException &e) {
    throw ExperimentError(fmt::format("{}:{}: {}", origin, e.mark.line + 1, e.msg));
  }
  if (!root.IsMap())
    throw ExperimentError(fmt::format("{}: expected a mapping at the top level", origin));
  const Fields top(root, "", origin);
  ExperimentConfig c;

  if (!top.child("plant_config"))
    top.fail("plant_config", "required field missing");
  std::string plant_path;
  top.read("plant_config", plant_path, "a path");
  c.plant_config = resolve(base_dir, plant_path);
  if (!std::filesystem::exists(c.plant_config))
    top.fail("plant_config", fmt::format("file not found: {}", c.plant_config.string()),
             top.child("plant_config"));

  c.objective = top.word("objective", [](const std::string &s) {
    return s.empty() ? controller::ObjectiveKind::kTracking : controller::parse_objective(s);
  });
  top.read("chance", c.chance, "on or off");
  top.integer("num_batches", c.num_batches);
  if (c.num_batches < 0)
    top.fail("num_batches", "must be non-negative", top.child("num_batches"));
  top.read("master_seed", c.master_seed, "an unsigned integer");
  if (top.child("seeds")) {
    top.read("seeds", c.seeds, "a list of unsigned integers");
    if (c.seeds.empty())
      top.fail("seeds", "must not be empty", top.child("seeds"));
  }
  if (top.child("initial_guess"))
    c.initial_guess = top.word("initial_guess", learner::parse_initial_guess);
  else if (c.objective == controller::ObjectiveKind::kEconomic)
    c.initial_guess = learner::InitialGuess::kMidpoint;

  const Fields pi = top.section("pi");
  pi.number("k_p", c.pi_k_p);
  pi.number("k_i_per_s", c.pi_k_i);

  const Fields ocp = top.section("ocp");
  ocp.integer("horizon", c.horizon);
  if (c.horizon < 1)
    ocp.fail("horizon", "must be at least 1", ocp.child("horizon"));
  ocp.number("terminal_weight", c.terminal_weight);
  ocp.number("penalty_weight", c.penalty_weight);
  ocp.number("epsilon", c.epsilon);
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
    ocp.fail("epsilon", "must lie in (0, 1)", ocp.child("epsilon"));

  const Fields solver = top.section("solver");
  solver.integer("max_iterations", c.solver_max_iterations);
  solver.number("tolerance", c.solver_tolerance);
  solver.number("relative_decrease", c.solver_relative_decrease);
  if (solver.child("gradient"))
    c.gradient = solver.word("gradient", controller::parse_gradient_mode);
  solver.number("fd_step", c.fd_step);
  solver.number("penalty_smoothing", c.penalty_smoothing);

  const Fields gp = top.section("gp");
  gp.integer("num_inducing", c.gp_num_inducing);
  if (c.gp_num_inducing < 1)
    gp.fail("num_inducing", "must be at least 1", gp.child("num_inducing"));
  gp.integer("restarts", c.gp_restarts);
  if (c.gp_restarts < 1)
    gp.fail("restarts", "must be at least 1", gp.child("restarts"));
  gp.integer("max_iterations", c.gp_max_iterations);
  gp.number("tolerance", c.gp_tolerance);
  gp.number("initial_signal_variance", c.gp_initial_signal_variance);
  gp.number("initial_sq_lengthscale", c.gp_initial_sq_lengthscale);
  gp.number("initial_noise_variance", c.gp_initial_noise_variance);
  gp.number("constant_control_scale", c.constant_control_scale);
  gp.number("constant_control_spread", c.constant_control_spread);

  std::string out;
  top.read("output_dir", out, "a path");
  c.output_dir = out.empty() ? std::filesystem::path() : resolve(base_dir, out);
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ExperimentError(fmt::format("cannot read experiment config {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment(buffer.str(), path.string(),
                          std::filesystem::absolute(path).parent_path());
}

std::string experiment_to_yaml(const ExperimentConfig &c) {
  std::string seeds;
  for (std::size_t k = 0; k < c.seeds.size(); ++k)
    seeds += fmt::format("{}{}", k ? ", " : "", c.seeds[k]);
  std::string s;
  s += fmt::format("plant_config: {}\n", quoted(c.plant_config));
  s += fmt::format("objective: {}\n", controller::to_string(c.objective));
  s += fmt::format("chance: {}\n", c.chance ? "on" : "off");
  s += fmt::format("num_batches: {}\n", c.num_batches);
  s += fmt::format("master_seed: {}\n", c.master_seed);
  s += fmt::format("seeds: [{}]\n", seeds);
  s += fmt::format("initial_guess: {}\n", learner::to_string(c.initial_guess));
  s += fmt::format("pi:\n  k_p: {}\n  k_i_per_s: {}\n", c.pi_k_p, c.pi_k_i);
  s += fmt::format("ocp:\n  horizon: {}\n  terminal_weight: {}\n  penalty_weight: {}\n"
                   "  epsilon: {}\n",
                   c.horizon, c.terminal_weight, c.penalty_weight, c.epsilon);
  s += fmt::format("solver:\n  max_iterations: {}\n  tolerance: {}\n  relative_decrease: {}\n"
                   "  gradient: {}\n  fd_step: {}\n  penalty_smoothing: {}\n",
                   c.solver_max_iterations, c.solver_tolerance, c.solver_relative_decrease,
                   controller::to_string(c.gradient), c.fd_step, c.penalty_smoothing);
  s += fmt::format("gp:\n  num_inducing: {}\n  restarts: {}\n  max_iterations: {}\n"
                   "  tolerance: {}\n  initial_signal_variance: {}\n"
                   "  initial_sq_lengthscale: {}\n  initial_noise_variance: {}\n"
                   "  constant_control_scale: {}\n  constant_control_spread: {}\n",
                   c.gp_num_inducing, c.gp_restarts, c.gp_max_iterations, c.gp_tolerance,
                   c.gp_initial_signal_variance, c.gp_initial_sq_lengthscale,
                   c.gp_initial_noise_variance, c.constant_control_scale,
                   c.constant_control_spread);
  if (!c.output_dir.empty())
    s += fmt::format("output_dir: {}\n", quoted(c.output_dir));
  return s;
}

learner::LearningConfig to_learning_config(const ExperimentConfig &c) {
  learner::LearningConfig l;
  try {
    l.plant = plant::load_plant_config(c.plant_config);
  } catch (const std::exception &e) {
    throw ExperimentError(fmt::format("plant_config {}: {}", c.plant_config.string(), e.what()));
  }
  l.objective = c.objective;
  l.chance_mode = c.chance ? controller::ChanceMode::kChance : controller::ChanceMode::kMeanOnly;
  l.ocp.horizon = c.horizon;
  l.ocp.terminal_weight = c.terminal_weight;
  l.ocp.penalty_weight = c.penalty_weight;
  l.ocp.epsilon = c.epsilon;
  l.ocp.solver.max_iterations = c.solver_max_iterations;
  l.ocp.solver.tolerance = c.solver_tolerance;
  l.ocp.solver.relative_decrease = c.solver_relative_decrease;
  l.ocp.solver.gradient = c.gradient;
  l.ocp.solver.fd_step = c.fd_step;
  l.ocp.solver.penalty_smoothing = c.penalty_smoothing;
  l.fit.num_inducing = c.gp_num_inducing;
  l.fit.restarts = c.gp_restarts;
  l.fit.optimizer.max_iterations = c.gp_max_iterations;
  l.fit.optimizer.tolerance = c.gp_tolerance;
  l.fit.initial_signal_variance = c.gp_initial_signal_variance;
  l.fit.initial_sq_lengthscale = c.gp_initial_sq_lengthscale;
  l.fit.initial_noise_variance = c.gp_initial_noise_variance;
  l.pi_k_p = c.pi_k_p;
  l.pi_k_i = c.pi_k_i;
  l.constant_control_scale = c.constant_control_scale;
  l.constant_control_spread = c.constant_control_spread;
  l.initial_guess = c.initial_guess;
  l.num_batches = c.num_batches;
  l.master_seed = c.master_seed;
  l.seeds = c.seeds;
  return l;
}

} // namespace gpmpc::cli
