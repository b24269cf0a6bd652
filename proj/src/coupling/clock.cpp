#include "tdcosim/coupling/clock.hpp"

#include <spdlog/spdlog.h>

namespace tdcosim::coupling {

ClockFollower::Verdict ClockFollower::observe(std::uint64_t seq, SimTime timestamp) {
  if (last_seq_ && seq <= *last_seq_) {
    ++duplicates_;
    return Verdict::Duplicate;
  }
  if (now_ && timestamp.ticks() < now_->ticks()) {
    ++regressions_;
    return Verdict::Regression;
  }
  last_seq_ = seq;
  now_ = timestamp;
  return Verdict::Accepted;
}

template <typename T>
std::optional<SimTime> sync_timestamp(ClockFollower& clock, const Wire<T>& msg) {
  const auto t = msg.message.timestamp;
  switch (clock.observe(msg.seq, t)) {
    case ClockFollower::Verdict::Accepted:
      return t;
    case ClockFollower::Verdict::Duplicate:
      spdlog::debug("dropping duplicate seq {} (t={} s)", msg.seq, t.seconds());
      return std::nullopt;
    case ClockFollower::Verdict::Regression:
      spdlog::warn("dropping seq {}: timestamp {} s is older than {} s", msg.seq, t.seconds(),
                   clock.now()->seconds());
      return std::nullopt;
  }
  return std::nullopt;
}

template std::optional<SimTime> sync_timestamp(ClockFollower&, const WireMeasurement&);
template std::optional<SimTime> sync_timestamp(ClockFollower&, const WireLoadUpdate&);

}  // namespace tdcosim::coupling
