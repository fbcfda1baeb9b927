#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "gpmpc/cli/commands.hpp"
#include "gpmpc/numerics/rng.hpp"

using namespace gpmpc;
using namespace gpmpc::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = GPMPC_SOURCE_DIR "/configs";

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("gpmpc_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig smoke() { return load_experiment(kConfigs / "smoke.yaml"); }

int run_cli(const std::string &args) {
  const std::string cmd = std::string(GPMPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool has_temporaries(const fs::path &dir) {
  for (const auto &e : fs::recursive_directory_iterator(dir))
    if (e.path().filename().string().find(".tmp") != std::string::npos)
      return true;
  return false;
}

} // namespace

TEST_CASE("shipped experiment configs parse") {
  for (const char *name : {"tracking_chance.yaml", "tracking_mean_only.yaml", "economic_chance.yaml",
                           "economic_mean_only.yaml", "smoke.yaml"}) {
    CAPTURE(name);
    const auto c = load_experiment(kConfigs / name);
    CHECK(c.plant_config == (kConfigs / "reactor.yaml").lexically_normal());
    CHECK(!c.seeds.empty());
  }
  const auto e = load_experiment(kConfigs / "economic_chance.yaml");
  CHECK(e.objective == controller::ObjectiveKind::kEconomic);
  CHECK(e.chance);
  CHECK(e.num_batches == 8);
  CHECK(e.initial_guess == learner::InitialGuess::kMidpoint);
  CHECK(!load_experiment(kConfigs / "tracking_mean_only.yaml").chance);
}

TEST_CASE("config errors name the field") {
  SUBCASE("missing plant config") {
    try {
      parse_experiment("objective: tracking\n", "x.yaml", kConfigs);
      FAIL("expected an error");
    } catch (const ExperimentError &e) {
      CHECK(std::string(e.what()).find("plant_config") != std::string::npos);
    }
  }
  SUBCASE("plant config that does not exist") {
    CHECK_THROWS_WITH_AS(parse_experiment("plant_config: nope.yaml\n", "x.yaml", kConfigs),
                         doctest::Contains("file not found"), ExperimentError);
  }
  SUBCASE("wrong type reports line and dotted field") {
    try {
      parse_experiment("plant_config: reactor.yaml\nocp:\n  horizon: twelve\n", "x.yaml", kConfigs);
      FAIL("expected an error");
    } catch (const ExperimentError &e) {
      const std::string what = e.what();
      CHECK(what.find("x.yaml:3") != std::string::npos);
      CHECK(what.find("ocp.horizon") != std::string::npos);
    }
  }
  SUBCASE("unknown objective and empty seeds") {
    CHECK_THROWS_WITH_AS(
        parse_experiment("plant_config: reactor.yaml\nobjective: fastest\n", "x.yaml", kConfigs),
        doctest::Contains("objective"), ExperimentError);
    CHECK_THROWS_WITH_AS(
        parse_experiment("plant_config: reactor.yaml\nseeds: []\n", "x.yaml", kConfigs),
        doctest::Contains("seeds"), ExperimentError);
    CHECK_THROWS_AS(parse_experiment("plant_config: reactor.yaml\nocp: {epsilon: 1.5}\n",
                                     "x.yaml", kConfigs),
                    ExperimentError);
  }
}

TEST_CASE("property: emitted manifest reparses to an equal config") {
  numerics::RngStream rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentConfig c = smoke();
    c.objective = rng.uniform() < 0.5 ? controller::ObjectiveKind::kTracking
                                      : controller::ObjectiveKind::kEconomic;
    c.chance = rng.uniform() < 0.5;
    c.initial_guess = rng.uniform() < 0.5 ? learner::InitialGuess::kNominal
                                          : learner::InitialGuess::kMidpoint;
    c.gradient = rng.uniform() < 0.5 ? controller::GradientMode::kAdjoint
                                     : controller::GradientMode::kFiniteDifference;
    c.num_batches = static_cast<int>(rng.uniform() * 20);
    c.master_seed = rng.next_u64();
    c.seeds.assign(1 + trial % 5, 0);
    for (auto &s : c.seeds)
      s = rng.next_u64();
    c.pi_k_p = 200.0 * rng.uniform();
    c.pi_k_i = rng.uniform() / 3.0;
    c.horizon = 1 + trial % 15;
    c.epsilon = 0.5 + 0.49 * rng.uniform();
    c.penalty_weight = std::exp(10.0 * rng.normal());
    c.solver_tolerance = std::exp(-20.0 * rng.uniform());
    c.penalty_smoothing = rng.uniform() * 1e-3;
    c.gp_initial_noise_variance = std::ldexp(rng.uniform(), -30);
    c.constant_control_scale = rng.uniform();
    c.output_dir = fs::temp_directory_path() / ("out dir \"" + std::to_string(trial) + "\"");
    const auto text = experiment_to_yaml(c);
    CAPTURE(text);
    CHECK(parse_experiment(text, "manifest", "/") == c);
  }
}

TEST_CASE("run writes manifest, trajectories, models and metrics") {
  const auto out = scratch("run");
  RunOptions opts;
  opts.out = out;
  std::ostringstream err;
  REQUIRE(cmd_run(smoke(), opts, err) == 0);
  const RunLayout layout{out};
  CHECK(fs::exists(layout.trajectory(0, 0)));
  CHECK(fs::exists(layout.trajectory(0, 1)));
  CHECK(fs::exists(layout.model(0, 1)));
  CHECK(!fs::exists(layout.model(0, 0)));
  CHECK(fs::exists(layout.solver_log(0, 1)));
  CHECK(!has_temporaries(out));

  const auto metrics = nlohmann::json::parse(slurp(layout.metrics()));
  REQUIRE(metrics["seeds"].size() == 1);
  const auto &records = metrics["seeds"][0]["records"];
  REQUIRE(records.size() == 2);
  CHECK(records[0]["batch"] == 0);
  CHECK(records[1]["batch"] == 1);
  CHECK(metrics["aggregate"].size() == 2);

  auto manifest = load_experiment(layout.manifest());
  auto expected = smoke();
  expected.output_dir = fs::absolute(out).lexically_normal();
  CHECK(manifest == expected);

  SUBCASE("rerun is byte-identical") {
    const auto first = slurp(layout.metrics());
    REQUIRE(cmd_run(smoke(), opts, err) == 0);
    CHECK(slurp(layout.metrics()) == first);
  }
  SUBCASE("replay reproduces the controls") {
    std::ostringstream o, e;
    CHECK(cmd_replay(layout.manifest(), o, e) == 0);
    CHECK(o.str().find("144 steps") != std::string::npos);
  }
  SUBCASE("replay names the first divergent step of a tampered log") {
    const auto path = layout.trajectory(0, 1);
    std::string csv = slurp(path);
    std::istringstream lines(csv);
    std::string line, rebuilt;
    for (int row = 0; std::getline(lines, line); ++row) {
      if (row == 1 + 37) {
        // Column 20 is the feed rate applied at step 37.
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
          cells.push_back(cell);
        cells[19] = "5000.5";
        line.clear();
        for (std::size_t k = 0; k < cells.size(); ++k)
          line += (k ? "," : "") + cells[k];
      }
      rebuilt += line + "\n";
    }
    std::ofstream(path) << rebuilt;
    std::ostringstream o, e;
    CHECK(cmd_replay(layout.manifest(), o, e) != 0);
    CHECK(e.str().find("first divergent step 37") != std::string::npos);
  }
  SUBCASE("replay reports a missing model with its path") {
    fs::remove(layout.model(0, 1));
    std::ostringstream o, e;
    CHECK(cmd_replay(layout.manifest(), o, e) != 0);
    CHECK(e.str().find(layout.model(0, 1).string()) != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("parallel seeds give the same metrics as sequential ones") {
  auto c = smoke();
  c.seeds = {4, 5};
  const auto a = scratch("seq"), b = scratch("par");
  std::ostringstream err;
  REQUIRE(cmd_run(c, RunOptions{a, 1, std::nullopt}, err) == 0);
  REQUIRE(cmd_run(c, RunOptions{b, 2, std::nullopt}, err) == 0);
  CHECK(slurp(RunLayout{a}.metrics()) == slurp(RunLayout{b}.metrics()));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("benchmarks") {
  const auto out = scratch("bench");
  RunOptions opts;
  opts.out = out;
  std::ostringstream err;
  SUBCASE("pi writes one trajectory and one record per seed") {
    REQUIRE(cmd_benchmark(smoke(), "pi", opts, err) == 0);
    CHECK(fs::exists(RunLayout{out}.benchmark_trajectory(0, "pi")));
    const auto j = nlohmann::json::parse(slurp(RunLayout{out}.benchmark_metrics("pi")));
    REQUIRE(j["seeds"].size() == 1);
    CHECK(j["seeds"][0]["record"]["batch"] == 0);
  }
  SUBCASE("full-model tracking reports an RMSE") {
    opts.seed_override = 3;
    REQUIRE(cmd_benchmark(smoke(), "full-model", opts, err) == 0);
    const auto j = nlohmann::json::parse(slurp(RunLayout{out}.benchmark_metrics("full-model")));
    REQUIRE(j["seeds"].size() == 1);
    CHECK(j["seeds"][0]["seed"] == 3);
    CHECK(j["seeds"][0]["record"]["rmse_degC"].get<double>() >= 0.0);
  }
  SUBCASE("unknown benchmark is a usage error") {
    CHECK(cmd_benchmark(smoke(), "bang-bang", opts, err) == 2);
    CHECK(err.str().find("bang-bang") != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("exit");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.yaml") << "objective: tracking\n";
  CHECK(run_cli("run --config " + (dir / "bad.yaml").string()) != 0);
  CHECK(run_cli("run") != 0);
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli("benchmark --which nothing --config " + (kConfigs / "smoke.yaml").string() +
                " --out " + (dir / "o").string()) != 0);
  CHECK(run_cli("replay " + (dir / "missing.yaml").string()) != 0);
  CHECK(run_cli("run --log-level warn --config " + (kConfigs / "smoke.yaml").string() +
                " --out " + (dir / "ok").string()) == 0);
  CHECK(run_cli("replay " + (dir / "ok" / "manifest.yaml").string()) == 0);
  fs::remove_all(dir);
}
