#pragma once

#include <nlohmann/json.hpp>
#include <ostream>

#include "tdcosim/distribution/feeder.hpp"
#include "tdcosim/distribution/sweep.hpp"

namespace tdcosim::dist {

inline constexpr const char* kFeederSchema = "tdcosim.feeder/1";

nlohmann::json feeder_to_json(const Feeder& feeder);
/// Throws ConfigError on schema or topology violations.
Feeder feeder_from_json(const nlohmann::json& j);

/// node,v_mag_pu,v_angle_rad,depth rows.
void write_voltage_csv(std::ostream& out, const Feeder& feeder, const PfSolution& solution);

}  // namespace tdcosim::dist
