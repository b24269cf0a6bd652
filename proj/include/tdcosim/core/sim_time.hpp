#pragma once

#include <compare>
#include <cstdint>

namespace tdcosim {

/// Integer tick count. One tick is kTickSizeUs microseconds.
using Ticks = std::int64_t;

inline constexpr std::int64_t kTickSizeUs = 1;
inline constexpr double kTickSeconds = 1e-6 * static_cast<double>(kTickSizeUs);

/// Converts seconds to ticks. Throws ConfigError when the value is not an
/// integral number of ticks (to within 1e-6 tick) or is negative.
Ticks seconds_to_ticks(double seconds);

constexpr double ticks_to_seconds(Ticks t) { return static_cast<double>(t) * kTickSeconds; }

/// Run-relative simulation time. Stored as an integer tick count and the
/// index of the owning loop's step, so that ticks == step_index * step_ticks
/// holds exactly.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime at_step(std::int64_t step_index, Ticks step_ticks) {
    return SimTime(step_index * step_ticks, step_index);
  }
  static constexpr SimTime from_ticks(Ticks ticks, std::int64_t step_index) { return SimTime(ticks, step_index); }

  constexpr Ticks ticks() const { return ticks_; }
  constexpr std::int64_t step_index() const { return step_index_; }
  constexpr double seconds() const { return ticks_to_seconds(ticks_); }

  constexpr SimTime next(Ticks step_ticks) const { return SimTime(ticks_ + step_ticks, step_index_ + 1); }

  friend constexpr bool operator==(const SimTime&, const SimTime&) = default;
  friend constexpr auto operator<=>(const SimTime&, const SimTime&) = default;

 private:
  constexpr SimTime(Ticks ticks, std::int64_t step) : ticks_(ticks), step_index_(step) {}

  Ticks ticks_ = 0;
  std::int64_t step_index_ = 0;
};

}  // namespace tdcosim
