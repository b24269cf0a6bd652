#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

namespace tdcosim::coupling {

/// Closed-loop delay of one co-sim step: Measurement publish to LoadUpdate
/// receipt, both on the monotonic clock.
struct DelaySample {
  std::int64_t step_index = 0;
  std::chrono::steady_clock::time_point t_publish;
  std::chrono::steady_clock::time_point t_load_received;

  double delay_s() const { return std::chrono::duration<double>(t_load_received - t_publish).count(); }
};

struct DelayStats {
  std::size_t count = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  double p50_s = 0.0;
  double p95_s = 0.0;
  double p99_s = 0.0;
  double bin_width_s = 0.01;
  std::vector<std::uint64_t> histogram;  // bin i covers [i*w, (i+1)*w)
};

/// Throws MetricError on empty input. Percentiles interpolate linearly
/// between order statistics.
DelayStats delay_stats(const std::vector<double>& delays_s, double bin_width_s = 0.01);
DelayStats delay_stats(const std::vector<DelaySample>& samples, double bin_width_s = 0.01);

}  // namespace tdcosim::coupling
