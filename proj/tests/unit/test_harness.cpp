#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "support/broker.hpp"
#include "tdcosim/core/errors.hpp"
#include "tdcosim/harness/evaluation.hpp"
#include "tdcosim/harness/metrics.hpp"
#include "tdcosim/harness/runner.hpp"
#include "tdcosim/harness/svg.hpp"

using namespace tdcosim;
using namespace tdcosim::harness;
using nlohmann::json;

namespace {

ScenarioSpec short_step(double dt_cosim_s, double phase_s, double duration_s = 4.0) {
  auto s = builtin_scenario("s1");
  s.config = make_config(0.005, dt_cosim_s);
  s.duration_s = duration_s;
  // Step at (2 + phase) s, well clear of the start and the end.
  s.reference.voltage = tx::SignalProgram::step(1.0, -0.05, seconds_to_ticks(2.0));
  s.step_phase_offset_s = phase_s;
  return s;
}

ScenarioSpec sine_at(double f_hz, double dt_cosim_s, double periods = 6.0) {
  auto s = builtin_scenario("s3");
  s.config = make_config(0.005, dt_cosim_s);
  s.reference.voltage = tx::SignalProgram::sine(1.0, 0.1, f_hz);
  s.duration_s = std::ceil(periods / f_hz / 0.005) * 0.005;
  s.check.f_hz = f_hz;
  return s;
}

double sinc(double x) { return std::sin(std::numbers::pi * x) / (std::numbers::pi * x); }

RunReport constant_report(std::size_t n, double value) {
  RunReport r;
  for (std::size_t i = 0; i < n; ++i) {
    r.t_s.push_back(0.005 * static_cast<double>(i));
    r.v_pcc.push_back(1.0);
    r.p_dx.push_back(value);
    r.q_dx.push_back(0.0);
    r.freq.push_back(60.0);
  }
  return r;
}

}  // namespace

TEST_CASE("built-in scenarios validate and survive a JSON round trip") {
  for (const auto& name : builtin_scenario_names()) {
    CAPTURE(name);
    const auto s = builtin_scenario(name);
    CHECK_NOTHROW(s.validate());
    const auto back = scenario_from_json(scenario_to_json(s));
    CHECK(scenario_to_json(back) == scenario_to_json(s));
    CHECK(back.feeder_model().ders.size() == s.feeder_model().ders.size());
  }
  CHECK_THROWS_AS(builtin_scenario("s9"), ConfigError);
}

TEST_CASE("shipped scenario files match the built-ins") {
  for (const auto& name : builtin_scenario_names()) {
    CAPTURE(name);
    const auto path = std::string(TDCOSIM_SCENARIO_DIR) + "/" + name + ".json";
    REQUIRE(std::filesystem::exists(path));
    CHECK(scenario_to_json(load_scenario_file(path)) == scenario_to_json(builtin_scenario(name)));
  }
}

TEST_CASE("scenario validation") {
  auto s = builtin_scenario("s1");
  SUBCASE("duration off the tick grid") {
    s.duration_s = 10.0021;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("DER event after the end") {
    s.der_events = {{11.0, false, {}}};
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("step pushed before t=0") {
    s.step_phase_offset_s = -6.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("step beyond the run") {
    s.step_phase_offset_s = 6.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("no feeder") {
    s.synthetic.reset();
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("cosim step not a multiple of dt_tx") {
    s.config.dt_cosim = 1'002'500;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("wrong schema") {
    auto j = scenario_to_json(builtin_scenario("s1"));
    j["schema"] = "something/else";
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
  }
  SUBCASE("missing file") {
    try {
      load_scenario_file("/nonexistent/scenario.json");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("file not found") != std::string::npos);
    }
  }
}

TEST_CASE("s2 shifts the step 0.1 s ahead of the boundary") {
  const auto s = builtin_scenario("s2");
  CHECK(first_step_time_s(s) == doctest::Approx(4.9).epsilon(1e-12));
  CHECK(expected_step_delay(4.9, 1.0) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(expected_step_delay(5.0, 1.0) == doctest::Approx(1.0));
  CHECK(expected_step_delay(2.25, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("constant reference gives constant series") {
  auto s = builtin_scenario("s1");
  s.reference.voltage = tx::SignalProgram::constant(1.0);
  s.duration_s = 3.0;
  s.check.kind = CheckSpec::Kind::None;
  const auto r = run_cosim(s);
  REQUIRE(r.complete);
  REQUIRE(r.t_s.size() == 601);
  for (const auto* name : {"v_pcc", "p_dx", "q_dx", "freq"}) {
    CAPTURE(name);
    const auto& x = r.signal(name);
    for (double v : x) CHECK(v == doctest::Approx(x.front()).epsilon(1e-9));
  }
}

TEST_CASE("logical co-simulation is deterministic") {
  const auto s = short_step(1.0, 0.0);
  const auto a = run_cosim(s);
  const auto b = run_cosim(s);
  CHECK(a.t_s == b.t_s);
  CHECK(a.v_pcc == b.v_pcc);
  CHECK(a.p_dx == b.p_dx);
  CHECK(a.q_dx == b.q_dx);
  CHECK(a.freq == b.freq);
}

TEST_CASE("cosim at dt_cosim = dt_tx is the monolithic oracle delayed by one tick") {
  auto s = short_step(0.005, 0.0, 3.0);
  s.synthetic->n_ders = 3;
  s.synthetic->der_mode = der::GsfMode::VoltVar;
  s.synthetic->der_p_available_pu = 0.8;
  const auto c = run_cosim(s);
  const auto m = run_monolithic(s);
  REQUIRE(c.t_s.size() == m.t_s.size());
  // The monolithic load at tick n answers V(n); the co-simulated load at
  // tick n answers the measurement taken at tick n-1.
  double worst = 0.0;
  for (std::size_t n = 1; n < c.p_dx.size(); ++n) worst = std::max(worst, std::abs(c.p_dx[n] - m.p_dx[n - 1]));
  CHECK(worst < 1e-9);
  CHECK(rms_difference(c, m, "p_dx") > 0.0);
}

TEST_CASE("monolithic oracle responds within one dt_tx of the step") {
  const auto s = builtin_scenario("s1");
  const auto m = run_monolithic(s);
  const double edge = edge_time(m, "p_dx");
  CHECK(edge - first_step_time_s(s) <= 0.005 + 1e-12);
  CHECK(edge >= first_step_time_s(s) - 1e-12);
}

TEST_CASE("monolithic distribution-only mode follows the reference program") {
  auto s = builtin_scenario("s1");
  s.duration_s = 6.0;
  const auto m = run_monolithic(s, RunMode::MonolithicDx);
  const auto ref = s.effective_reference();
  REQUIRE(m.t_s.size() == 1201);
  CHECK(m.v_pcc[900] == doctest::Approx(ref.voltage.evaluate(seconds_to_ticks(4.5))));
  CHECK(m.v_pcc[1100] == doctest::Approx(0.95));
  coupling::DxModel dx(s.feeder_model(), {}, s.config);
  CHECK(m.p_dx[1100] == doctest::Approx(dx.solve(SimTime{}, 0.95, 0.0, 60.0).load.p_mw).epsilon(1e-12));
  CHECK_THROWS_AS(run_monolithic(s, RunMode::Cosim), ConfigError);
}

TEST_CASE("propagation delay: scenarios 1 and 2, identity and errors") {
  for (const char* name : {"s1", "s2"}) {
    CAPTURE(name);
    const auto s = builtin_scenario(name);
    const auto c = run_cosim(s);
    const auto m = run_monolithic(s);
    const double expected = name == std::string("s1") ? 1.0 : 0.1;
    CHECK(std::abs(propagation_delay(c, m, "p_dx") - expected) <= 0.005);
    CHECK(propagation_delay(c, c, "p_dx") == 0.0);
  }
  const auto flat = constant_report(100, 3.0);
  try {
    edge_time(flat, "p_dx");
    FAIL("expected an error");
  } catch (const MetricError& e) {
    CHECK(std::string(e.what()).find("p_dx") != std::string::npos);
  }
  CHECK_THROWS_AS(edge_time(flat, "voltage"), MetricError);
  CHECK_THROWS_AS(edge_time(flat, "p_dx", 1.5), MetricError);
}

TEST_CASE("edge detection on a hand-built series") {
  auto r = constant_report(11, 0.0);
  for (std::size_t i = 6; i < 11; ++i) r.p_dx[i] = -2.0;
  r.p_dx[5] = -0.99;  // below half of the change
  CHECK(edge_time(r, "p_dx") == doctest::Approx(0.030));
  CHECK(edge_time(r, "p_dx", 0.4) == doctest::Approx(0.025));
}

TEST_CASE("phase sweep: delay is dt_cosim minus the step phase") {
  for (double frac : {0.0, 0.1, 0.25, 0.5, 0.9}) {
    CAPTURE(frac);
    const auto s = short_step(1.0, frac);
    const auto c = run_cosim(s);
    const auto m = run_monolithic(s);
    const double expected = 1.0 - frac;
    CHECK(std::abs(propagation_delay(c, m, "p_dx") - expected) <= 0.005 + 1e-9);
    CHECK(expected_step_delay(first_step_time_s(s), 1.0) == doctest::Approx(expected));
  }
}

TEST_CASE("single-bin DFT recovers a known sinusoid") {
  std::vector<double> x;
  const double dt = 0.005, f = 0.25;
  for (int n = 0; n < 1600; ++n) x.push_back(3.0 + 0.7 * std::sin(2 * std::numbers::pi * f * n * dt + 0.3));
  CHECK(dft_amplitude(x, dt, f) == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(dft_amplitude(x, dt, 2 * f) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(dft_amplitude(std::vector<double>{}, dt, f), MetricError);
}

TEST_CASE("spectral ratio: scenarios 3 and 4") {
  {
    const auto s = builtin_scenario("s3");
    const auto r = spectral_ratio(run_cosim(s), run_monolithic(s), "p_dx", 0.25);
    CHECK(r.periods == 5);
    CHECK(r.amplitude_ratio >= 0.7);
    CHECK(r.amplitude_ratio == doctest::Approx(sinc(0.25)).epsilon(0.02));
    CHECK(r.detected_peak_hz == doctest::Approx(0.25));
  }
  {
    const auto s = builtin_scenario("s4");
    const auto r = spectral_ratio(run_cosim(s), run_monolithic(s), "p_dx", 1.0);
    CHECK((r.amplitude_ratio < 0.3 || std::abs(r.detected_peak_hz - 1.0) > 1e-9));
  }
  {
    auto s = builtin_scenario("s4");
    s.config = make_config(0.005, 0.1);
    const auto r = spectral_ratio(run_cosim(s), run_monolithic(s), "p_dx", 1.0);
    CHECK(r.amplitude_ratio >= 0.7);
    CHECK(r.detected_peak_hz == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral ratio rejects short series") {
  const auto longer = constant_report(801, 1.0);
  CHECK_THROWS_AS(spectral_ratio(longer, longer, "p_dx", 1.0), MetricError);  // 4 s is four periods; no response
  const auto short_one = constant_report(700, 1.0);
  CHECK_THROWS_AS(spectral_ratio(short_one, short_one, "p_dx", 1.0), MetricError);
  CHECK_THROWS_AS(spectral_ratio(short_one, short_one, "p_dx", 0.0), MetricError);
}

TEST_CASE("Nyquist sweep with dt_cosim = 1 s") {
  // Zero-order hold of the sampled boundary voltage attenuates the
  // fundamental by |sinc(f * dt_cosim)|.
  for (double k : {0.1, 0.2, 0.4, 0.45}) {
    CAPTURE(k);
    const auto s = sine_at(k, 1.0);
    const auto r = spectral_ratio(run_cosim(s), run_monolithic(s), "p_dx", k);
    CHECK(std::abs(r.amplitude_ratio - sinc(k)) < 0.06);
    // 0.45 sits 0.004 above the threshold: the alias at 1 - f leaks into
    // the analysis bin and lifts the ratio over sinc(0.45) = 0.699.
    CHECK(r.amplitude_ratio >= 0.7);
    CHECK(r.detected_peak_hz == doctest::Approx(k));
  }
  const auto s = sine_at(1.0, 1.0);
  const auto r = spectral_ratio(run_cosim(s), run_monolithic(s), "p_dx", 1.0);
  CHECK((r.amplitude_ratio < 0.3 || std::abs(r.detected_peak_hz - 1.0) > 1e-9));
}

TEST_CASE("DER event metrics") {
  SUBCASE("zero-DER fleet gives zeros") {
    auto s = builtin_scenario("der-events");
    s.synthetic->n_ders = 0;
    s.duration_s = 30.0;
    const auto m = der_event_metrics(run_cosim(s));
    CHECK(m.head_p_jump_mw == 0.0);
    CHECK(m.v_pcc_drop_pu == 0.0);
    CHECK(m.recovery_error_pu == 0.0);
  }
  SUBCASE("missing reconnect is an error") {
    auto s = builtin_scenario("der-events");
    s.der_events.pop_back();
    s.duration_s = 15.0;
    CHECK_THROWS_AS(der_event_metrics(run_cosim(s)), MetricError);
  }
  SUBCASE("a 2 MW fleet dropping out") {
    const auto s = builtin_scenario("der-events");
    const auto c = run_cosim(s);
    json metrics;
    const auto checks = evaluate_checks(s, c, run_monolithic(s), metrics);
    for (const auto& k : checks) {
      CAPTURE(k.name);
      CHECK(k.passed);
    }
    CHECK(metrics["oracle"]["fleet_p_mw"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(metrics["head_p_jump_mw"].get<double>() > 2.0);
    // The fleet settles to the same operating point after reconnecting.
    CHECK(c.p_dx.back() == doctest::Approx(c.p_dx[2599]).epsilon(1e-9));
  }
}

TEST_CASE("evaluation flags a wrong delay") {
  const auto s = builtin_scenario("s1");
  const auto m = run_monolithic(s);
  json metrics;
  auto mono_as_cosim = m;
  mono_as_cosim.mode = RunMode::Cosim;
  const auto checks = evaluate_checks(s, mono_as_cosim, m, metrics);
  bool delay_failed = false;
  for (const auto& c : checks) {
    if (c.name == "propagation_delay") delay_failed = !c.passed;
  }
  CHECK(delay_failed);
  CHECK(metrics["propagation_delay_s"].get<double>() == 0.0);
}

TEST_CASE("report integrity") {
  auto r = constant_report(10, 1.0);
  CHECK_NOTHROW(r.check_integrity());
  r.p_dx.pop_back();
  CHECK_THROWS_AS(r.check_integrity(), MetricError);
  auto n = constant_report(10, 1.0);
  n.v_pcc[3] = std::nan("");
  CHECK_THROWS_AS(n.check_integrity(), MetricError);
}

TEST_CASE("run report JSON round trip") {
  auto s = builtin_scenario("der-events");
  s.duration_s = 30.0;
  const auto r = run_cosim(s);
  const auto back = report_from_json(json::parse(report_to_json(r).dump()));
  CHECK(back.mode == r.mode);
  CHECK(back.p_dx == r.p_dx);
  CHECK(back.v_pcc == r.v_pcc);
  CHECK(back.der_ids == r.der_ids);
  CHECK(back.der_outputs.size() == r.der_outputs.size());
  CHECK(back.der_events == r.der_events);
  CHECK(back.delay_s == r.delay_s);
  CHECK(back.counters == r.counters);
  CHECK(back.complete == r.complete);
}

TEST_CASE("artifacts are written") {
  const auto dir = std::filesystem::temp_directory_path() / "tdcosim-artifacts-test";
  std::filesystem::remove_all(dir);
  auto s = builtin_scenario("der-events");
  const auto o = run_scenario(s);
  CHECK(o.passed());
  write_artifacts(o, dir);
  for (const char* f : {"report.json", "mono_report.json", "signals.csv", "metrics.json", "der_outputs.csv",
                        "plots/v_pcc.svg", "plots/p_dx.svg", "plots/der_fleet.svg", "plots/delay_histogram.svg"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir / f));
  }
  std::ifstream csv(dir / "signals.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t_s,v_pcc,p_dx,q_dx,freq,mono_v_pcc,mono_p_dx,mono_q_dx,mono_freq");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 8001);
  std::ifstream mj(dir / "metrics.json");
  const auto metrics = json::parse(mj);
  CHECK(metrics["passed"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg rendering") {
  LinePlot p{"a < b", "t", "y", {{"one", {0, 1, 2}, {1, 2, 1}, "#000", false}}};
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  BarPlot b{"h", "x", "n", 0.01, {1, 0, 3}, {0.05}};
  CHECK(render_svg(b).find("<rect") != std::string::npos);
}

TEST_CASE("distribution endpoint as a separate process over MQTT") {
  std::string why;
  auto broker = testing::TestBroker::acquire(why);
  if (!broker) {
    MESSAGE("skipping, no MQTT broker: " << why);
    return;
  }
  auto s = builtin_scenario("s1");
  s.transport.kind = TransportSpec::Kind::Mqtt;
  s.transport.host = broker->host();
  s.transport.port = broker->port();
  s.transport.dx_process = true;
  RunOptions opts;
  opts.dx_executable = TDCOSIM_CLI_PATH;
  const auto c = run_cosim(s, opts);
  REQUIRE(c.complete);
  auto local = s;
  local.transport = {};
  const auto l = run_cosim(local);
  CHECK(c.p_dx == l.p_dx);
  CHECK(c.v_pcc == l.v_pcc);
  CHECK(c.der_outputs.empty());

  RunOptions none;
  CHECK_THROWS_AS(run_cosim(s, none), ConfigError);
  auto bad = s;
  bad.transport.kind = TransportSpec::Kind::Loopback;
  CHECK_THROWS_AS(run_cosim(bad, opts), ConfigError);
}
