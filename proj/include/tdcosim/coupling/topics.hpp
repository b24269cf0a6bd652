#pragma once

#include <string>
#include <string_view>

namespace tdcosim::coupling {

/// Topic names for one run. Identifiers may not contain '/', '+' or '#',
/// so every topic is a concrete name and never a wildcard.
class TopicMap {
 public:
  TopicMap(std::string run_id, std::string poi_id, std::string feeder_id);

  const std::string& run_id() const { return run_id_; }
  const std::string& poi_id() const { return poi_id_; }
  const std::string& feeder_id() const { return feeder_id_; }

  std::string measurement_topic() const;
  std::string load_topic() const;
  std::string control_topic() const;

  std::string tx_client_id() const { return "cosim-tx-" + run_id_; }
  std::string dx_client_id() const { return "cosim-dx-" + run_id_; }

 private:
  std::string run_id_;
  std::string poi_id_;
  std::string feeder_id_;
};

/// MQTT filter matching with '+' (one level) and '#' (remaining levels).
bool topic_matches(std::string_view filter, std::string_view topic);

/// True when `topic` is usable as a publish name.
bool is_valid_topic_name(std::string_view topic);

}  // namespace tdcosim::coupling
