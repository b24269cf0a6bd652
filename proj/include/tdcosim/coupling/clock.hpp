#pragma once

#include <cstdint>
#include <optional>

#include "tdcosim/core/sim_time.hpp"
#include "tdcosim/coupling/wire.hpp"

namespace tdcosim::coupling {

/// Follower side of the master clock. The follower never advances time on
/// its own: now() is the timestamp of the last accepted message.
class ClockFollower {
 public:
  enum class Verdict { Accepted, Duplicate, Regression };

  /// Duplicate: seq not above the last accepted seq. Regression: timestamp
  /// older than the last accepted one. Rejected messages leave the clock
  /// unchanged.
  Verdict observe(std::uint64_t seq, SimTime timestamp);

  std::optional<SimTime> now() const { return now_; }
  std::uint64_t duplicates() const { return duplicates_; }
  std::uint64_t regressions() const { return regressions_; }

 private:
  std::optional<SimTime> now_;
  std::optional<std::uint64_t> last_seq_;
  std::uint64_t duplicates_ = 0;
  std::uint64_t regressions_ = 0;
};

/// Adopts the master timestamp of `msg`, or returns nullopt (and logs) when
/// the follower rejects it.
template <typename T>
std::optional<SimTime> sync_timestamp(ClockFollower& clock, const Wire<T>& msg);

extern template std::optional<SimTime> sync_timestamp(ClockFollower&, const WireMeasurement&);
extern template std::optional<SimTime> sync_timestamp(ClockFollower&, const WireLoadUpdate&);

}  // namespace tdcosim::coupling
