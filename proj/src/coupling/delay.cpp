#include "tdcosim/coupling/delay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::coupling {

namespace {

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

DelayStats delay_stats(const std::vector<double>& delays_s, double bin_width_s) {
  if (delays_s.empty()) throw MetricError("delay statistics need at least one sample");
  if (!(bin_width_s > 0.0)) throw MetricError("histogram bin width must be positive");
  std::vector<double> sorted = delays_s;
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.front() >= 0.0) || !std::isfinite(sorted.back())) {
    throw MetricError("delay samples must be finite and non-negative");
  }

  DelayStats s;
  s.count = sorted.size();
  s.mean_s = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.count);
  s.min_s = sorted.front();
  s.max_s = sorted.back();
  s.p50_s = percentile(sorted, 0.50);
  s.p95_s = percentile(sorted, 0.95);
  s.p99_s = percentile(sorted, 0.99);
  s.bin_width_s = bin_width_s;
  s.histogram.assign(static_cast<std::size_t>(std::floor(s.max_s / bin_width_s)) + 1, 0);
  for (double d : sorted) ++s.histogram[static_cast<std::size_t>(std::floor(d / bin_width_s))];
  return s;
}

DelayStats delay_stats(const std::vector<DelaySample>& samples, double bin_width_s) {
  std::vector<double> d;
  d.reserve(samples.size());
  for (const auto& s : samples) d.push_back(s.delay_s());
  return delay_stats(d, bin_width_s);
}

}  // namespace tdcosim::coupling
