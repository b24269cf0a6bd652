#include "tdcosim/core/sim_time.hpp"

#include <cmath>
#include <sstream>

#include "tdcosim/core/errors.hpp"

namespace tdcosim {

Ticks seconds_to_ticks(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    std::ostringstream os;
    os << "time value must be finite and non-negative, got " << seconds;
    throw ConfigError(os.str());
  }
  const double raw = seconds / kTickSeconds;
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-6 * std::max(1.0, rounded)) {
    std::ostringstream os;
    os << seconds << " s is not a whole number of " << kTickSizeUs << " us ticks";
    throw ConfigError(os.str());
  }
  return static_cast<Ticks>(rounded);
}

}  // namespace tdcosim
