#pragma once

namespace tdcosim {

/// MW or MVAr to per unit on `base_mva`. Throws ConfigError for base <= 0.
double to_per_unit(double value_physical, double base_mva);
double from_per_unit(double value_pu, double base_mva);

}  // namespace tdcosim
