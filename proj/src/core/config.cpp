#include "tdcosim/core/config.hpp"

#include <cmath>
#include <string>

#include "tdcosim/core/errors.hpp"

namespace tdcosim {

std::string_view to_string(PacingMode mode) {
  return mode == PacingMode::RealTime ? "realtime" : "logical";
}

PacingMode pacing_mode_from_string(std::string_view name) {
  if (name == "realtime" || name == "RealTime") return PacingMode::RealTime;
  if (name == "logical" || name == "Logical") return PacingMode::Logical;
  throw ConfigError("unknown pacing mode '" + std::string(name) + "'");
}

void CosimConfig::validate() const {
  if (dt_tx <= 0) throw ConfigError("dt_tx must be positive");
  if (dt_cosim <= 0) throw ConfigError("dt_cosim must be positive");
  if (dt_cosim % dt_tx != 0) {
    throw ConfigError("dt_cosim (" + std::to_string(dt_cosim_seconds()) + " s) is not an integer multiple of dt_tx (" +
                      std::to_string(dt_tx_seconds()) + " s)");
  }
  if (max_der_pf_iterations < 1) throw ConfigError("max_der_pf_iterations must be >= 1");
  if (!(pf_tolerance > 0.0)) throw ConfigError("pf_tolerance must be > 0");
  if (!(base_mva_tx > 0.0) || !(base_mva_feeder > 0.0)) throw ConfigError("MVA bases must be positive");
}

CosimConfig make_config(double dt_tx_s, double dt_cosim_s) {
  CosimConfig c;
  c.dt_tx = seconds_to_ticks(dt_tx_s);
  c.dt_cosim = seconds_to_ticks(dt_cosim_s);
  return c;
}

std::int64_t ticks_per_cosim_step(const CosimConfig& config) {
  config.validate();
  return config.dt_cosim / config.dt_tx;
}

}  // namespace tdcosim
