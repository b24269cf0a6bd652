#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "tdcosim/der/fleet.hpp"
#include "tdcosim/distribution/feeder.hpp"

namespace tdcosim::der {

nlohmann::json der_to_json(const DerUnit& der);
DerUnit der_from_json(const nlohmann::json& j);

/// Feeder document plus an inline "ders" array.
struct FeederModel {
  dist::Feeder feeder;
  std::vector<DerUnit> ders;
};

nlohmann::json feeder_model_to_json(const FeederModel& model);
FeederModel feeder_model_from_json(const nlohmann::json& j);
FeederModel load_feeder_model_file(const std::string& path);

/// One row per DER per recorded co-simulation step.
struct DerStepRecord {
  std::int64_t step_index = 0;
  double t_s = 0.0;
  std::vector<DerOutput> outputs;
};

/// step_index,t_s,der_id,p_pu,q_pu rows.
void write_der_csv(std::ostream& out, const std::vector<DerUnit>& ders, const std::vector<DerStepRecord>& records);

}  // namespace tdcosim::der
