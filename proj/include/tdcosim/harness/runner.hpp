#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "tdcosim/harness/report.hpp"
#include "tdcosim/harness/scenario.hpp"

namespace tdcosim::harness {

struct RunOptions {
  /// Executable that understands `dx-endpoint --config <file>`; required
  /// when the scenario runs the distribution endpoint as a process.
  std::string dx_executable;
  /// Publish every message twice on both sides, to exercise the
  /// duplicate filters.
  bool duplicate_delivery = false;
};

/// Full coupled run through the coupling module.
RunReport run_cosim(const ScenarioSpec& spec, const RunOptions& options = {});

/// One-process oracle. MonolithicTx exchanges boundary values every dt_tx
/// with no transport: the feeder load solving tick n is the distribution
/// answer for the voltage of tick n-1. MonolithicDx drives the feeder head
/// straight from the reference program, with no transmission network.
RunReport run_monolithic(const ScenarioSpec& spec, RunMode mode = RunMode::MonolithicTx);

/// Document consumed by a distribution endpoint process.
nlohmann::json endpoint_process_config(const ScenarioSpec& spec, const std::string& run_id, const std::string& host,
                                       std::uint16_t port);

/// Runs a distribution endpoint over MQTT until the master sends stop.
/// Announces itself with {"cmd":"ready"} on the control topic once
/// subscribed. Returns the number of steps solved.
std::int64_t run_endpoint_process(const nlohmann::json& config);

}  // namespace tdcosim::harness
