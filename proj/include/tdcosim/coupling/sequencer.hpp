#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tdcosim/core/config.hpp"
#include "tdcosim/core/events.hpp"
#include "tdcosim/core/messages.hpp"
#include "tdcosim/coupling/delay.hpp"
#include "tdcosim/coupling/dx_model.hpp"
#include "tdcosim/coupling/topics.hpp"
#include "tdcosim/coupling/transport.hpp"
#include "tdcosim/transmission/simulator.hpp"

namespace tdcosim::coupling {

enum class StalePolicy { HoldLast, ZeroLoad };

std::string_view to_string(StalePolicy p);
StalePolicy stale_policy_from_string(std::string_view name);

struct SequencerOptions {
  /// Transmission bus that is measured and carries the feeder spot load.
  std::string poi_bus;
  StalePolicy stale_policy = StalePolicy::HoldLast;
  /// Logical pacing waits this long for each reply before giving up.
  std::chrono::milliseconds logical_reply_timeout{10'000};
  /// Called repeatedly while waiting, for transports that need pumping.
  std::function<void()> pump;
  /// Publish {"cmd":"stop"} on the control topic when the run ends.
  bool send_stop = true;
};

struct AppliedLoad {
  SimTime applied_at;  // first transmission tick solved with this load
  LoadUpdate update;
};

struct SequencerReport {
  /// Transmission states and the feeder load in force, index 0 = t0.
  std::vector<tx::TxState> states;
  std::vector<double> p_mw;
  std::vector<double> q_mvar;

  std::vector<Measurement> measurements;
  std::vector<AppliedLoad> applied;
  std::vector<DelaySample> delays;
  std::vector<OverrunEvent> overruns;

  std::uint64_t duplicates_dropped = 0;
  std::uint64_t late_discarded = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t logical_timeouts = 0;
  std::uint64_t nonconverged_replies = 0;
  std::uint64_t stale_steps = 0;

  bool complete = false;
  std::string abort_reason;
};

/// Iterates transmission and distribution at t=0 until the feeder load and
/// the POI voltage agree, leaving the simulator at that equilibrium. Returns
/// the number of exchanges; throws SolverDivergence when it does not settle.
int settle_initial_state(tx::TxSimulator& sim, DxModel& dx, const std::string& poi_bus, const CosimConfig& config,
                         double tolerance_mw = 1e-9, int max_iterations = 200);

/// Master clock of the co-simulation. Runs the transmission loop for
/// `duration` and exchanges boundary values every dt_cosim.
///
/// At each boundary t_k = k*dt_cosim with t_k < duration, Measurement k is
/// taken from the state in force when t_k is reached and published with
/// timestamp t_k. Under Logical pacing the sequencer then waits for reply k
/// and the new load governs ticks t_k onwards. Under RealTime pacing the
/// exchange never blocks: a reply is applied at the first tick after it
/// arrives, and a reply still missing at the next boundary is an overrun
/// handled by the stale policy (a late copy is discarded).
SequencerReport sequencer_run(tx::TxSimulator& sim, Transport& transport, const TopicMap& topics,
                              const CosimConfig& config, Ticks duration, const SequencerOptions& options);

}  // namespace tdcosim::coupling
