#include "tdcosim/harness/evaluation.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/coupling/delay.hpp"
#include "tdcosim/harness/metrics.hpp"
#include "tdcosim/harness/svg.hpp"

namespace tdcosim::harness {

using nlohmann::json;

namespace {

CheckResult make_check(std::string name, bool ok, double measured, std::string expected, std::string detail = {}) {
  return {std::move(name), ok, measured, std::move(expected), std::move(detail)};
}

void integrity_checks(const ScenarioSpec& spec, const RunReport& r, std::vector<CheckResult>& out) {
  const std::string tag = std::string(to_string(r.mode));
  const auto expected_len = static_cast<double>(spec.duration_ticks() / spec.config.dt_tx + 1);
  try {
    r.check_integrity();
    out.push_back(make_check(tag + ".series_length", static_cast<double>(r.t_s.size()) == expected_len,
                             static_cast<double>(r.t_s.size()), fmt::format("== {}", expected_len)));
  } catch (const MetricError& e) {
    out.push_back(make_check(tag + ".series_integrity", false, 0.0, "no gaps, finite", e.what()));
  }
  if (r.mode == RunMode::Cosim) {
    out.push_back(make_check("cosim.complete", r.complete, r.complete ? 1.0 : 0.0, "complete run", r.abort_reason));
  }
  if (spec.config.pacing_mode == PacingMode::Logical) {
    out.push_back(make_check(tag + ".logical_overruns", r.overruns.empty(), static_cast<double>(r.overruns.size()),
                             "== 0"));
  }
}

/// Independent bookkeeping for a whole-fleet disconnect: solve the feeder at
/// the pre-event head voltage with the fleet on and off.
json fleet_oracle(const ScenarioSpec& spec, double v_pu, double f_hz) {
  const auto model = spec.feeder_model();
  coupling::DxModel on(model, {}, spec.config);
  coupling::DxModel off(model, {{0.0, false, {}}}, spec.config);
  const auto a = on.solve(SimTime{}, v_pu, 0.0, f_hz);
  const auto b = off.solve(SimTime{}, v_pu, 0.0, f_hz);
  const double fleet_mw = a.pf.outputs.total_injection_pu().real() * spec.config.base_mva_feeder;
  const double jump = b.load.p_mw - a.load.p_mw;
  return {{"fleet_p_mw", fleet_mw}, {"expected_jump_mw", jump}, {"loss_delta_mw", jump - fleet_mw}};
}

}  // namespace

json check_to_json(const CheckResult& c) {
  json j = {{"name", c.name}, {"passed", c.passed}, {"expected", c.expected}};
  j["measured"] = std::isfinite(c.measured) ? json(c.measured) : json(nullptr);
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

bool ScenarioOutcome::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<CheckResult> ScenarioOutcome::failures() const {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c);
  }
  return out;
}

double expected_step_delay(double step_s, double dt_cosim_s) {
  const double phase = std::fmod(step_s, dt_cosim_s);
  const double phi = (phase < 1e-9 || dt_cosim_s - phase < 1e-9) ? 0.0 : phase;
  return dt_cosim_s - phi;
}

double first_step_time_s(const ScenarioSpec& spec) {
  const auto ref = spec.effective_reference();
  if (ref.voltage.kind == tx::SignalProgram::Kind::Step) return ticks_to_seconds(ref.voltage.step_time);
  if (ref.frequency.kind == tx::SignalProgram::Kind::Step) return ticks_to_seconds(ref.frequency.step_time);
  throw ConfigError("scenario '" + spec.name + "' has no step in its reference program");
}

std::vector<CheckResult> evaluate_checks(const ScenarioSpec& spec, const RunReport& cosim, const RunReport& mono,
                                         json& metrics) {
  std::vector<CheckResult> out;
  integrity_checks(spec, cosim, out);
  integrity_checks(spec, mono, out);
  const double dt_tx = spec.config.dt_tx_seconds();
  const double dt1 = spec.config.dt_cosim_seconds();
  const auto& signal = spec.check.signal;

  try {
    switch (spec.check.kind) {
      case CheckSpec::Kind::None:
        break;
      case CheckSpec::Kind::Delay: {
        const double expected = expected_step_delay(first_step_time_s(spec), dt1);
        const double d = propagation_delay(cosim, mono, signal);
        metrics["propagation_delay_s"] = d;
        metrics["expected_delay_s"] = expected;
        out.push_back(make_check("propagation_delay", std::abs(d - expected) <= dt_tx + 1e-9, d,
                                 fmt::format("[{:.6g}, {:.6g}] s", expected - dt_tx, expected + dt_tx)));
        break;
      }
      case CheckSpec::Kind::Spectral: {
        const double f = spec.check.f_hz;
        const auto s = spectral_ratio(cosim, mono, signal, f);
        const double bin = f / s.periods;
        const bool peak_ok = std::abs(s.detected_peak_hz - f) < 0.5 * bin;
        metrics["amplitude_ratio"] = s.amplitude_ratio;
        metrics["detected_peak_hz"] = s.detected_peak_hz;
        metrics["amplitude"] = s.amplitude;
        metrics["oracle_amplitude"] = s.oracle_amplitude;
        metrics["periods"] = s.periods;
        metrics["f_hz"] = f;
        metrics["rms_difference"] = rms_difference(cosim, mono, signal);
        if (spec.check.expect_propagation) {
          out.push_back(make_check("amplitude_ratio", s.amplitude_ratio >= 0.7, s.amplitude_ratio, ">= 0.7"));
          out.push_back(make_check("detected_peak", peak_ok, s.detected_peak_hz, fmt::format("{} Hz", f)));
        } else {
          const bool fails = s.amplitude_ratio < 0.3 || !peak_ok;
          out.push_back(make_check("tracking_failure", fails, s.amplitude_ratio,
                                   fmt::format("ratio < 0.3 or peak != {} Hz", f),
                                   fmt::format("detected peak {:.6g} Hz", s.detected_peak_hz)));
        }
        break;
      }
      case CheckSpec::Kind::DerEvents: {
        const auto m = der_event_metrics(cosim);
        metrics["head_p_jump_mw"] = m.head_p_jump_mw;
        metrics["v_pcc_drop_pu"] = m.v_pcc_drop_pu;
        metrics["recovery_error_pu"] = m.recovery_error_pu;
        const auto mono_m = der_event_metrics(mono);
        metrics["mono"] = {{"head_p_jump_mw", mono_m.head_p_jump_mw},
                           {"v_pcc_drop_pu", mono_m.v_pcc_drop_pu},
                           {"recovery_error_pu", mono_m.recovery_error_pu}};
        const auto before = static_cast<std::size_t>(std::llround((m.t_disconnect_s - dt_tx) / dt_tx));
        const auto oracle = fleet_oracle(spec, cosim.v_pcc[before], cosim.freq[before]);
        metrics["oracle"] = oracle;
        const double expected = oracle["expected_jump_mw"].get<double>();
        const double fleet = oracle["fleet_p_mw"].get<double>();
        const double loss = oracle["loss_delta_mw"].get<double>();
        out.push_back(make_check("head_p_jump", std::abs(m.head_p_jump_mw - expected) <= 1e-6, m.head_p_jump_mw,
                                 fmt::format("{:.6f} MW (fleet {:.6f} MW + loss delta {:.6f} MW) +- 1e-6",
                                             expected, fleet, loss)));
        out.push_back(make_check("v_pcc_drop", m.v_pcc_drop_pu > 0.0, m.v_pcc_drop_pu, "> 0"));
        out.push_back(make_check("recovery_error", m.recovery_error_pu < 1e-6, m.recovery_error_pu, "< 1e-6 pu"));
        break;
      }
      case CheckSpec::Kind::Soak: {
        const auto cosim_overruns = cosim.overruns_of(OverrunKind::CosimLoop);
        metrics["cosim_loop_overruns"] = cosim_overruns;
        metrics["tx_step_overruns"] = cosim.overruns_of(OverrunKind::TxStep);
        if (cosim.delay_s.empty()) {
          out.push_back(make_check("delay_samples", false, 0.0, "> 0"));
          break;
        }
        const auto st = coupling::delay_stats(cosim.delay_s);
        metrics["delay"] = {{"count", st.count}, {"mean_s", st.mean_s}, {"min_s", st.min_s}, {"max_s", st.max_s},
                            {"p50_s", st.p50_s},  {"p95_s", st.p95_s},   {"p99_s", st.p99_s},
                            {"bin_width_s", st.bin_width_s}, {"histogram", st.histogram}};
        out.push_back(make_check("max_delay", st.max_s < dt1, st.max_s, fmt::format("< {} s", dt1)));
        out.push_back(make_check("cosim_loop_overruns", cosim_overruns == 0, static_cast<double>(cosim_overruns),
                                 "== 0"));
        break;
      }
    }
  } catch (const Error& e) {
    out.push_back(make_check("metric", false, 0.0, "metric computable", e.what()));
  }
  return out;
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec, const RunOptions& options) {
  ScenarioOutcome o;
  o.spec = spec;
  o.cosim = run_cosim(spec, options);
  o.mono = run_monolithic(spec, RunMode::MonolithicTx);
  o.checks = evaluate_checks(spec, o.cosim, o.mono, o.metrics);
  return o;
}

json failure_summary(const ScenarioOutcome& outcome) {
  json f = json::array();
  for (const auto& c : outcome.failures()) f.push_back(check_to_json(c));
  return {{"scenario", outcome.spec.name}, {"passed", outcome.passed()}, {"failures", f}};
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
}

void write_signals_csv(const std::filesystem::path& p, const RunReport& c, const RunReport& m) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << "t_s,v_pcc,p_dx,q_dx,freq,mono_v_pcc,mono_p_dx,mono_q_dx,mono_freq\n";
  const auto n = std::min(c.t_s.size(), m.t_s.size());
  for (std::size_t i = 0; i < n; ++i) {
    out << fmt::format("{:.6f},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", c.t_s[i], c.v_pcc[i],
                       c.p_dx[i], c.q_dx[i], c.freq[i], m.v_pcc[i], m.p_dx[i], m.q_dx[i], m.freq[i]);
  }
}

LinePlot overlay(const ScenarioOutcome& o, const std::string& signal, const std::string& unit) {
  LinePlot p;
  p.title = fmt::format("{}: {} (dt_cosim = {} s)", o.spec.name, signal, o.spec.config.dt_cosim_seconds());
  p.x_label = "time (s)";
  p.y_label = signal + " (" + unit + ")";
  p.series.push_back({"monolithic", o.mono.t_s, o.mono.signal(signal), "#7f7f7f", true});
  p.series.push_back({"co-simulation", o.cosim.t_s, o.cosim.signal(signal), "#1f77b4", false});
  return p;
}

}  // namespace

void write_artifacts(const ScenarioOutcome& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "plots");
  write_text(dir / "report.json", report_to_json(o.cosim).dump(2) + "\n");
  write_text(dir / "mono_report.json", report_to_json(o.mono).dump(2) + "\n");
  write_signals_csv(dir / "signals.csv", o.cosim, o.mono);

  json checks = json::array();
  for (const auto& c : o.checks) checks.push_back(check_to_json(c));
  json metrics = {{"scenario", o.spec.name}, {"passed", o.passed()}, {"metrics", o.metrics}, {"checks", checks}};
  for (const auto& [k, v] : o.cosim.counters) metrics["counters"][k] = v;
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");

  if (!o.cosim.der_ids.empty()) {
    const auto model = o.spec.feeder_model();
    std::ofstream csv(dir / "der_outputs.csv");
    der::write_der_csv(csv, model.ders, o.cosim.der_outputs);
  }

  write_text(dir / "plots" / "v_pcc.svg", render_svg(overlay(o, "v_pcc", "pu")));
  write_text(dir / "plots" / "p_dx.svg", render_svg(overlay(o, "p_dx", "MW")));

  if (!o.cosim.delay_s.empty()) {
    const auto st = coupling::delay_stats(o.cosim.delay_s);
    BarPlot h;
    h.title = fmt::format("{}: closed-loop delay, {} samples, mean {:.1f} ms, max {:.1f} ms", o.spec.name, st.count,
                          st.mean_s * 1e3, st.max_s * 1e3);
    h.x_label = "delay (s)";
    h.y_label = "count";
    h.bin_width = st.bin_width_s;
    h.counts.assign(st.histogram.begin(), st.histogram.end());
    h.markers = {o.spec.config.dt_cosim_seconds()};
    write_text(dir / "plots" / "delay_histogram.svg", render_svg(h));
  }

  if (!o.cosim.der_events.empty() && !o.cosim.der_outputs.empty()) {
    const auto model = o.spec.feeder_model();
    LinePlot p;
    p.title = o.spec.name + ": aggregate DER active power";
    p.x_label = "time (s)";
    p.y_label = "P (MW)";
    PlotSeries s{"fleet", {}, {}, "#2ca02c", false};
    for (const auto& rec : o.cosim.der_outputs) {
      double total = 0.0;
      for (std::size_t i = 0; i < rec.outputs.size() && i < model.ders.size(); ++i) {
        total += rec.outputs[i].p_pu * model.ders[i].s_rated_mva;
      }
      s.x.push_back(rec.t_s);
      s.y.push_back(total);
    }
    p.series.push_back(std::move(s));
    write_text(dir / "plots" / "der_fleet.svg", render_svg(p));
  }
}

}  // namespace tdcosim::harness
