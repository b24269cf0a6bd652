#pragma once

#include <cstdint>
#include <string_view>

#include "tdcosim/core/sim_time.hpp"

namespace tdcosim {

enum class PacingMode { RealTime, Logical };

std::string_view to_string(PacingMode mode);
PacingMode pacing_mode_from_string(std::string_view name);

/// Run-wide timing and solver settings shared by both federates.
struct CosimConfig {
  Ticks dt_tx = 5'000;          // 5 ms
  Ticks dt_cosim = 1'000'000;   // 1 s
  int max_der_pf_iterations = 20;
  double pf_tolerance = 1e-8;
  PacingMode pacing_mode = PacingMode::Logical;
  double base_mva_tx = 100.0;
  double base_mva_feeder = 10.0;

  double dt_tx_seconds() const { return ticks_to_seconds(dt_tx); }
  double dt_cosim_seconds() const { return ticks_to_seconds(dt_cosim); }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Builds a config from second-valued timesteps; throws ConfigError when
/// either is not a whole number of ticks.
CosimConfig make_config(double dt_tx_s, double dt_cosim_s);

/// Number of transmission ticks per co-simulation step. Throws ConfigError
/// when dt_cosim is not an integer multiple of dt_tx.
std::int64_t ticks_per_cosim_step(const CosimConfig& config);

}  // namespace tdcosim
