#include "tdcosim/harness/metrics.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::harness {

namespace {

std::size_t index_at(const RunReport& r, double t_s) {
  const double n = std::round(t_s / r.dt_tx_s);
  if (n < 0 || n >= static_cast<double>(r.t_s.size())) {
    throw MetricError("time " + std::to_string(t_s) + " s is outside the report");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

double edge_time(const RunReport& report, std::string_view signal, double threshold_frac) {
  if (!(threshold_frac > 0.0 && threshold_frac < 1.0)) throw MetricError("threshold fraction must be in (0, 1)");
  const auto& x = report.signal(signal);
  if (x.size() < 2) throw MetricError("no detectable edge in " + std::string(signal) + ": series too short");
  const double initial = x.front();
  const double change = x.back() - initial;
  if (std::abs(change) <= 1e-9 * std::max(1.0, std::abs(initial))) {
    throw MetricError("no detectable edge in " + std::string(signal));
  }
  const double level = threshold_frac * std::abs(change);
  for (std::size_t n = 0; n < x.size(); ++n) {
    if ((x[n] - initial) * (change > 0 ? 1.0 : -1.0) >= level) return report.t_s[n];
  }
  throw MetricError("no detectable edge in " + std::string(signal));
}

double propagation_delay(const RunReport& cosim, const RunReport& mono, std::string_view signal,
                         double threshold_frac) {
  return edge_time(cosim, signal, threshold_frac) - edge_time(mono, signal, threshold_frac);
}

double dft_amplitude(std::span<const double> x, double dt_s, double f_hz) {
  if (x.empty()) throw MetricError("empty series");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::complex<double> acc{};
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double phase = 2.0 * std::numbers::pi * f_hz * dt_s * static_cast<double>(n);
    acc += (x[n] - mean) * std::polar(1.0, -phase);
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

SpectralResult spectral_ratio(const RunReport& report, const RunReport& mono, std::string_view signal, double f_hz) {
  if (!(f_hz > 0.0)) throw MetricError("excitation frequency must be positive");
  if (std::abs(report.dt_tx_s - mono.dt_tx_s) > 1e-12) throw MetricError("reports use different dt_tx");
  const auto& x = report.signal(signal);
  const auto& y = mono.signal(signal);
  const double dt = report.dt_tx_s;
  const double duration = dt * static_cast<double>(std::min(x.size(), y.size()) - 1);
  const double period = 1.0 / f_hz;
  if (duration + 1e-9 < 4.0 * period) {
    throw MetricError(std::string(signal) + " covers fewer than four periods of " + std::to_string(f_hz) + " Hz");
  }
  SpectralResult out;
  out.periods = static_cast<int>(std::floor((duration - period) / period + 1e-9));
  const auto first = static_cast<std::size_t>(std::llround(period / dt));
  const auto count = static_cast<std::size_t>(std::llround(out.periods * period / dt));
  const std::span<const double> xs(x.data() + first, count);
  const std::span<const double> ys(y.data() + first, count);
  out.amplitude = dft_amplitude(xs, dt, f_hz);
  out.oracle_amplitude = dft_amplitude(ys, dt, f_hz);
  if (!(out.oracle_amplitude > 0.0)) throw MetricError("oracle shows no response in " + std::string(signal));
  out.amplitude_ratio = out.amplitude / out.oracle_amplitude;

  // Bins are spaced 1/(periods*T); the excitation sits on bin `periods`.
  const double bin_hz = f_hz / out.periods;
  double best = -1.0;
  for (int k = 1; k < 2 * out.periods; ++k) {
    const double a = dft_amplitude(xs, dt, k * bin_hz);
    if (a > best) {
      best = a;
      out.detected_peak_hz = k * bin_hz;
    }
  }
  return out;
}

DerEventMetrics der_event_metrics(const RunReport& report) {
  DerEventMetrics m;
  if (report.der_ids.empty()) return m;
  const coupling::DerEvent* off = nullptr;
  const coupling::DerEvent* on = nullptr;
  for (const auto& e : report.der_events) {
    if (!off && !e.connected) off = &e;
    else if (off && !on && e.connected) on = &e;
  }
  if (!off || !on) throw MetricError("report needs a disconnect followed by a reconnect");
  m.t_disconnect_s = off->at_s;
  m.t_reconnect_s = on->at_s;

  const auto before = index_at(report, off->at_s - report.dt_tx_s);
  const auto after = index_at(report, off->at_s + report.dt_cosim_s - report.dt_tx_s);
  m.head_p_jump_mw = report.p_dx[after] - report.p_dx[before];
  m.v_pcc_drop_pu = report.v_pcc[before] - report.v_pcc[after];
  m.recovery_error_pu = std::abs(report.v_pcc.back() - report.v_pcc[before]);
  return m;
}

double rms_difference(const RunReport& a, const RunReport& b, std::string_view signal) {
  const auto& x = a.signal(signal);
  const auto& y = b.signal(signal);
  if (x.size() != y.size() || x.empty()) throw MetricError("series lengths differ for " + std::string(signal));
  double acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) acc += (x[n] - y[n]) * (x[n] - y[n]);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace tdcosim::harness
