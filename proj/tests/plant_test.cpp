#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "gpmpc/numerics/rng.hpp"
#include "gpmpc/plant/config.hpp"
#include "gpmpc/plant/reactor.hpp"
#include "support/reactor_oracle.hpp"

using namespace gpmpc;
using namespace gpmpc::plant;
using gpmpc::testing::random_state;
using gpmpc::testing::transcribed_rhs;

namespace {

PlantConfig reference_config() {
  return load_plant_config(std::filesystem::path(GPMPC_SOURCE_DIR) / "configs" /
                           "reactor.yaml");
}

ControlVector random_control(numerics::RngStream &rng, const ControlBounds &b) {
  ControlVector u;
  for (int i = 0; i < kNumControls; ++i)
    u[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * rng.uniform();
  return u;
}

std::vector<StateVector> nominal_batch(const PlantConfig &cfg, int substeps) {
  Integration integ = cfg.integration;
  integ.substeps = substeps;
  std::vector<StateVector> xs{cfg.initial_state};
  for (int k = 0; k < cfg.steps_per_batch(); ++k)
    xs.push_back(step(xs.back(), cfg.nominal_controls, cfg.params, integ));
  return xs;
}

} // namespace

TEST_CASE("reference config loads and is self-consistent") {
  const auto cfg = reference_config();
  CHECK(cfg.steps_per_batch() == 144);
  CHECK(cfg.noise.sigma_temperature == 0.1);
  CHECK(cfg.noise.sigma_mass == 33.0);
  CHECK(cfg.constraints.adiabatic_max == 109.0);
  CHECK(cfg.initial_state[kTempAdiabatic] ==
        doctest::Approx(90.0 + 853.0 * 950.0 / (10879.5 * 5.0)));
  CHECK(cfg.initial_state[kTempAdiabatic] < cfg.constraints.adiabatic_max);
}

TEST_CASE("config errors name the offending field") {
  const auto dir = std::filesystem::temp_directory_path() / "gpmpc_plant_test";
  std::filesystem::create_directories(dir);
  std::ifstream in(std::filesystem::path(GPMPC_SOURCE_DIR) / "configs" / "reactor.yaml");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto pos = text.find("  k_U2: 32.0");
  REQUIRE(pos != std::string::npos);
  text.erase(pos, text.find('\n', pos) - pos + 1);
  const auto path = dir / "broken.yaml";
  std::ofstream(path) << text;
  try {
    load_plant_config(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("parameters.k_U2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_plant_config(dir / "does_not_exist.yaml"), ConfigError);
}

TEST_CASE("rhs") {
  const auto cfg = reference_config();
  numerics::RngStream rng(5);
  SUBCASE("no feed means no water inflow") {
    ControlVector u = cfg.nominal_controls;
    u[kFeedRate] = 0.0;
    CHECK(rhs(random_state(rng), u, cfg.params)[kMassWater] == 0.0);
  }
  SUBCASE("no monomer and no feed means no reaction") {
    StateVector x = random_state(rng);
    x[kMassMonomer] = 0.0;
    ControlVector u = cfg.nominal_controls;
    u[kFeedRate] = 0.0;
    const auto d = rhs(x, u, cfg.params);
    CHECK(d[kMassMonomer] == 0.0);
    CHECK(d[kMassPolymer] == 0.0);
  }
  SUBCASE("agrees with an independent transcription at random states") {
    for (int trial = 0; trial < 3; ++trial) {
      const StateVector x = random_state(rng);
      const ControlVector u = random_control(rng, cfg.bounds);
      std::array<double, 9> xs;
      std::array<double, 3> us;
      for (int i = 0; i < 9; ++i)
        xs[i] = x[i];
      for (int i = 0; i < 3; ++i)
        us[i] = u[i];
      const auto expected = transcribed_rhs(xs, us, cfg.params);
      const auto got = rhs(x, u, cfg.params);
      for (int i = 0; i < 9; ++i)
        CHECK(std::abs(got[i] - expected[i]) <= 1e-12 * std::max(1.0, std::abs(expected[i])));
    }
  }
  SUBCASE("empty reactor is reported as non-finite") {
    StateVector x = random_state(rng);
    x.head<3>().setZero();
    CHECK_THROWS_AS(rhs(x, cfg.nominal_controls, cfg.params), NonFiniteState);
  }
}

TEST_CASE("rk4 integration") {
  SUBCASE("zero dynamics leave the state unchanged") {
    auto zero = [](const StateVector &, const ControlVector &) {
      return StateVector::Zero().eval();
    };
    numerics::RngStream rng(1);
    const StateVector x = random_state(rng);
    CHECK(rk4_interval<double>(zero, x, ControlVector::Zero(), 0.5, 3) == x);
  }
  SUBCASE("linear decay matches the closed form") {
    auto decay = [](const StateVector &x, const ControlVector &) {
      return StateVector(-x);
    };
    const StateVector x0 = StateVector::Ones();
    const StateVector x = rk4_interval<double>(decay, x0, ControlVector::Zero(), 0.1, 10);
    CHECK((x - x0 * std::exp(-0.1)).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("halving the internal step barely changes the nominal result") {
    const auto cfg = reference_config();
    Integration fine = cfg.integration;
    fine.substeps *= 2;
    const auto a = step(cfg.initial_state, cfg.nominal_controls, cfg.params, cfg.integration);
    const auto b = step(cfg.initial_state, cfg.nominal_controls, cfg.params, fine);
    CHECK(((a - b).array().abs() / b.array().abs().max(1.0)).maxCoeff() <= 1e-6);
  }
}

TEST_CASE("property: observed RK4 order on the nominal batch") {
  const auto cfg = reference_config();
  const int n = cfg.integration.substeps;
  const auto coarse = nominal_batch(cfg, n);
  const auto mid = nominal_batch(cfg, 2 * n);
  const auto fine = nominal_batch(cfg, 4 * n);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    e1 = std::max(e1, (coarse[k] - mid[k]).norm());
    e2 = std::max(e2, (mid[k] - fine[k]).norm());
  }
  const double order = std::log2(e1 / e2);
  MESSAGE("observed order " << order);
  CHECK(order >= 3.8);
}

TEST_CASE("property: masses stay non-negative over a batch with random bounded controls") {
  const auto cfg = reference_config();
  numerics::RngStream rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    StateVector x = cfg.initial_state;
    for (int k = 0; k < cfg.steps_per_batch(); ++k) {
      x = step(x, random_control(rng, cfg.bounds), cfg.params, cfg.integration);
      CHECK(x.head<3>().minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("property: feed bookkeeping without reaction") {
  auto cfg = reference_config();
  cfg.params.k0 = 0.0;
  numerics::RngStream rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector x = random_state(rng);
    const ControlVector u = random_control(rng, cfg.bounds);
    const StateVector next = step(x, u, cfg.params, cfg.integration);
    const double expected =
        x.head<3>().sum() + u[kFeedRate] * cfg.integration.dt_hours() *
                                (cfg.params.feed_water_fraction + cfg.params.feed_monomer_fraction);
    CHECK(next.head<3>().sum() == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("property: simulation is deterministic") {
  const auto cfg = reference_config();
  auto run = [&] {
    numerics::RngStream rng(77);
    StateVector x = cfg.initial_state;
    std::vector<StateVector> ys;
    for (int k = 0; k < 20; ++k) {
      ys.push_back(measure(x, cfg.noise, rng));
      x = step(x, cfg.nominal_controls, cfg.params, cfg.integration);
    }
    ys.push_back(x);
    return ys;
  };
  CHECK(run() == run());
}

TEST_CASE("measure") {
  const auto cfg = reference_config();
  numerics::RngStream rng(2);
  SUBCASE("zero noise returns the state") {
    const NoiseSpec none{0.0, 0.0};
    CHECK(measure(cfg.initial_state, none, rng) == cfg.initial_state);
  }
  SUBCASE("sample standard deviations match the noise levels") {
    const int draws = 10000;
    double s_t = 0.0, ss_t = 0.0, s_m = 0.0, ss_m = 0.0;
    for (int i = 0; i < draws; ++i) {
      const auto y = measure(cfg.initial_state, cfg.noise, rng) - cfg.initial_state;
      s_t += y[kTempReactor];
      ss_t += y[kTempReactor] * y[kTempReactor];
      s_m += y[kMassPolymer];
      ss_m += y[kMassPolymer] * y[kMassPolymer];
    }
    const double sd_t = std::sqrt((ss_t - s_t * s_t / draws) / (draws - 1));
    const double sd_m = std::sqrt((ss_m - s_m * s_m / draws) / (draws - 1));
    CHECK(sd_t >= 0.095);
    CHECK(sd_t <= 0.105);
    CHECK(sd_m >= 31.0);
    CHECK(sd_m <= 35.0);
  }
}

TEST_CASE("violation") {
  const ConstraintSpec spec;
  StateVector x = StateVector::Zero();
  x[kTempReactor] = 90.0;
  x[kTempAdiabatic] = 100.0;
  CHECK(violation(x, spec) == ViolationVector::Zero());
  x[kTempReactor] = 93.0;
  CHECK(violation(x, spec)[0] == doctest::Approx(1.0));
  CHECK(violation(x, spec)[1] == 0.0);
  x[kTempReactor] = 87.5;
  CHECK(violation(x, spec)[1] == doctest::Approx(0.5));
  x[kTempAdiabatic] = 110.5;
  CHECK(violation(x, spec)[2] == doctest::Approx(1.5));
}
