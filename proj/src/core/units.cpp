#include "tdcosim/core/units.hpp"

#include <cmath>
#include <string>

#include "tdcosim/core/errors.hpp"

namespace tdcosim {

namespace {
void check_base(double base_mva) {
  if (!(base_mva > 0.0) || !std::isfinite(base_mva)) {
    throw ConfigError("MVA base must be positive, got " + std::to_string(base_mva));
  }
}
}  // namespace

double to_per_unit(double value_physical, double base_mva) {
  check_base(base_mva);
  return value_physical / base_mva;
}

double from_per_unit(double value_pu, double base_mva) {
  check_base(base_mva);
  return value_pu * base_mva;
}

}  // namespace tdcosim
