#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "tdcosim/core/config.hpp"
#include "tdcosim/core/events.hpp"
#include "tdcosim/transmission/solver.hpp"

namespace tdcosim::tx {

/// Owns the network and advances it one dt_tx at a time. Spot-load changes
/// from any thread go through post_spot_load() and take effect at the top of
/// the next step (or resolve()).
class TxSimulator {
 public:
  TxSimulator(TxNetwork network, Ticks dt_tx, TxSolveOptions options = {});

  void post_spot_load(std::string bus, double p_pu, double q_pu);

  /// Drains pending loads, advances time by dt_tx and solves.
  const TxState& step();

  /// Drains pending loads and re-solves the current instant without
  /// advancing time. Used while settling the initial operating point.
  const TxState& resolve();

  const TxState& state() const { return state_; }
  const TxNetwork& network() const { return network_; }
  Ticks dt_tx() const { return dt_tx_; }

 private:
  void drain_pending();

  struct PendingLoad {
    std::string bus;
    SpotLoad load;
  };

  TxNetwork network_;
  Ticks dt_tx_;
  TxSolveOptions options_;
  TxState state_;
  std::mutex pending_mutex_;
  std::vector<PendingLoad> pending_;
};

struct TxLoopHooks {
  /// Runs at the top of each tick, before pending loads are drained.
  /// Argument is the time about to be solved.
  std::function<void(SimTime)> before_step;
  /// Runs after each solve with the new state.
  std::function<void(const TxState&)> after_step;
  /// Polled before each tick; returning false ends the run early.
  std::function<bool()> keep_running;
};

struct TxRunResult {
  std::vector<TxState> states;  // one per completed tick
  std::vector<OverrunEvent> overruns;
  std::int64_t ticks_completed = 0;
  bool stopped_early = false;
};

/// Advances `ticks` steps. In RealTime pacing each step is released by a
/// monotonic timer and an overrun is recorded when a step's compute time
/// (hooks included) exceeds dt_tx. Logical pacing never records overruns.
/// A throwing hook aborts the run with HookError.
TxRunResult run_tx_loop(TxSimulator& sim, const CosimConfig& config, std::int64_t ticks, const TxLoopHooks& hooks,
                        bool record_states = true);

}  // namespace tdcosim::tx
