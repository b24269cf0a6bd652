#pragma once

#include <span>
#include <string_view>

#include "tdcosim/harness/report.hpp"

namespace tdcosim::harness {

/// Time of the first sample whose departure from the initial value reaches
/// threshold_frac of the overall change (final minus initial). Throws
/// MetricError naming the signal when the series has no such change.
double edge_time(const RunReport& report, std::string_view signal, double threshold_frac = 0.5);

/// Co-simulated edge time minus monolithic edge time, seconds.
double propagation_delay(const RunReport& cosim, const RunReport& mono, std::string_view signal,
                         double threshold_frac = 0.5);

/// Single-bin DFT amplitude of x at f_hz, mean removed.
double dft_amplitude(std::span<const double> x, double dt_s, double f_hz);

struct SpectralResult {
  double amplitude_ratio = 0.0;
  double detected_peak_hz = 0.0;
  double amplitude = 0.0;         // report
  double oracle_amplitude = 0.0;  // monolithic
  int periods = 0;                // whole periods analysed
};

/// Amplitude of `signal` at f_hz relative to the monolithic oracle. The
/// first period is discarded and a whole number of periods analysed; the
/// detected peak is the strongest bin below 2*f_hz. Throws MetricError when
/// fewer than four periods are available.
SpectralResult spectral_ratio(const RunReport& report, const RunReport& mono, std::string_view signal, double f_hz);

struct DerEventMetrics {
  double head_p_jump_mw = 0.0;
  double v_pcc_drop_pu = 0.0;
  double recovery_error_pu = 0.0;
  double t_disconnect_s = 0.0;
  double t_reconnect_s = 0.0;
};

/// Measures the first disconnect and the reconnect that follows it. "Before"
/// is the last tick ahead of the disconnect, "after" the last tick before the
/// next co-simulation boundary. A report without DERs gives all zeros.
DerEventMetrics der_event_metrics(const RunReport& report);

double rms_difference(const RunReport& a, const RunReport& b, std::string_view signal);

}  // namespace tdcosim::harness
