#include <doctest.h>

#include <cmath>
#include <random>

#include "tdcosim/core/config.hpp"
#include "tdcosim/core/errors.hpp"
#include "tdcosim/core/messages.hpp"
#include "tdcosim/core/sim_time.hpp"
#include "tdcosim/core/units.hpp"

using namespace tdcosim;

TEST_CASE("per-unit conversion") {
  CHECK(to_per_unit(100.0, 100.0) == 1.0);
  CHECK(to_per_unit(0.0, 37.0) == 0.0);
  CHECK(to_per_unit(2.5, 10.0) == 0.25);
  CHECK_THROWS_AS(to_per_unit(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(to_per_unit(1.0, -5.0), ConfigError);
  CHECK_THROWS_AS(from_per_unit(1.0, 0.0), ConfigError);
}

TEST_CASE("per-unit round trip stays within one ulp") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> value(-1e4, 1e4);
  for (double base : {1.0, 10.0, 100.0}) {
    for (int i = 0; i < 20000; ++i) {
      const double x = value(rng);
      const double back = from_per_unit(to_per_unit(x, base), base);
      CHECK(std::abs(back - x) <= std::abs(std::nextafter(x, 2 * x) - x));
    }
  }
}

TEST_CASE("ticks per co-simulation step") {
  CHECK(ticks_per_cosim_step(make_config(0.005, 1.0)) == 200);
  CHECK(ticks_per_cosim_step(make_config(0.1, 0.1)) == 1);
  CHECK_THROWS_AS(ticks_per_cosim_step(make_config(0.003, 1.0)), ConfigError);
}

TEST_CASE("config validation") {
  CosimConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_der_pf_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = CosimConfig{};
  c.pf_tolerance = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = CosimConfig{};
  c.base_mva_feeder = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(pacing_mode_from_string("realtime") == PacingMode::RealTime);
  CHECK_THROWS_AS(pacing_mode_from_string("warp"), ConfigError);
}

TEST_CASE("seconds to ticks") {
  CHECK(seconds_to_ticks(0.005) == 5000);
  CHECK(seconds_to_ticks(4.9) == 4'900'000);
  CHECK(seconds_to_ticks(0.0) == 0);
  CHECK_THROWS_AS(seconds_to_ticks(1e-7), ConfigError);
  CHECK_THROWS_AS(seconds_to_ticks(-1.0), ConfigError);
  CHECK_THROWS_AS(seconds_to_ticks(NAN), ConfigError);
}

TEST_CASE("SimTime arithmetic is exact") {
  const Ticks dt = seconds_to_ticks(0.005);
  SimTime t;
  for (int k = 1; k <= 200'000; ++k) {
    t = t.next(dt);
    if (k % 997 == 0) {
      CHECK(t.ticks() == k * dt);
      CHECK(t == SimTime::at_step(k, dt));
    }
  }
  CHECK(t.step_index() == 200'000);
  CHECK(t.seconds() == 1000.0);
  CHECK(SimTime::at_step(3, dt) < SimTime::at_step(4, dt));
}

TEST_CASE("messages are value types") {
  Measurement m{SimTime::at_step(2, 1'000'000), "pcc", 1.01, -0.1, 60.0};
  Measurement copy = m;
  CHECK(copy == m);
  copy.v_mag_pu = 1.02;
  CHECK_FALSE(copy == m);
}
