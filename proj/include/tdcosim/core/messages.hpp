#pragma once

#include <string>

#include "tdcosim/core/sim_time.hpp"

namespace tdcosim {

/// Boundary quantities published by transmission at each co-sim step.
struct Measurement {
  SimTime timestamp;
  std::string poi_id;
  double v_mag_pu = 1.0;
  double v_angle_rad = 0.0;
  double freq_hz = 60.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Aggregate feeder-head consumption returned by distribution.
struct LoadUpdate {
  SimTime timestamp;  // echo of the triggering Measurement
  std::string feeder_id;
  double p_mw = 0.0;
  double q_mvar = 0.0;
  bool converged = true;
  int iterations_used = 0;

  friend bool operator==(const LoadUpdate&, const LoadUpdate&) = default;
};

}  // namespace tdcosim
