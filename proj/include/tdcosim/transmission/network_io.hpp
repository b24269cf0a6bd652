#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "tdcosim/transmission/network.hpp"

namespace tdcosim::tx {

inline constexpr const char* kTxNetworkSchema = "tdcosim.tx_network/1";

nlohmann::json signal_to_json(const SignalProgram& program);
SignalProgram signal_from_json(const nlohmann::json& j);

nlohmann::json reference_to_json(const ReferenceProgram& program);
ReferenceProgram reference_from_json(const nlohmann::json& j);

nlohmann::json network_to_json(const TxNetwork& network);
/// Throws ConfigError on schema violations.
TxNetwork network_from_json(const nlohmann::json& j);
TxNetwork load_network_file(const std::string& path);

}  // namespace tdcosim::tx
