#pragma once

#include <complex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tdcosim/core/config.hpp"
#include "tdcosim/core/events.hpp"
#include "tdcosim/core/messages.hpp"
#include "tdcosim/der/fleet.hpp"
#include "tdcosim/der/fleet_io.hpp"

namespace tdcosim::coupling {

/// Scheduled connection change; an empty id list means every DER.
struct DerEvent {
  double at_s = 0.0;
  bool connected = false;
  std::vector<std::string> ids;

  friend bool operator==(const DerEvent&, const DerEvent&) = default;
};

nlohmann::json der_event_to_json(const DerEvent& e);
DerEvent der_event_from_json(const nlohmann::json& j);

/// Feeder, DER fleet and its event schedule, solved one boundary at a time.
/// Both the co-simulated distribution endpoint and the monolithic runner use
/// this, so the physics on either side of the comparison is identical.
class DxModel {
 public:
  DxModel(der::FeederModel model, const std::vector<DerEvent>& events, const CosimConfig& config);

  struct Result {
    LoadUpdate load;
    der::DerPfResult pf;
    std::optional<OverrunEvent> overrun;  // DerPfIterationCap
  };

  /// Fires due DER events, then runs the DER/power-flow loop at the given
  /// head voltage (magnitude and angle) and frequency.
  Result solve(SimTime t, double v_mag_pu, double v_angle_rad, double freq_hz);

  const dist::Feeder& feeder() const { return feeder_; }
  const std::vector<der::DerUnit>& ders() const { return registry_.ders(); }
  double base_mva() const { return config_.base_mva_feeder; }

 private:
  dist::Feeder feeder_;
  der::DerRegistry registry_;
  CosimConfig config_;
  der::DerPfOptions options_;
};

}  // namespace tdcosim::coupling
