#include "tdcosim/transmission/simulator.hpp"

#include <chrono>
#include <thread>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::tx {

TxSimulator::TxSimulator(TxNetwork network, Ticks dt_tx, TxSolveOptions options)
    : network_(std::move(network)), dt_tx_(dt_tx), options_(options) {
  if (dt_tx_ <= 0) throw ConfigError("dt_tx must be positive");
  const SimTime t0 = SimTime::at_step(0, dt_tx_);
  state_ = solve_tx(network_, flat_state(network_, t0), t0, options_);
}

void TxSimulator::post_spot_load(std::string bus, double p_pu, double q_pu) {
  if (!network_.has_bus(bus)) throw ConfigError("unknown transmission bus '" + bus + "'");
  std::lock_guard lock(pending_mutex_);
  pending_.push_back({std::move(bus), {p_pu, q_pu}});
}

void TxSimulator::drain_pending() {
  std::vector<PendingLoad> batch;
  {
    std::lock_guard lock(pending_mutex_);
    batch.swap(pending_);
  }
  for (const auto& p : batch) network_.set_spot_load(p.bus, p.load.p_pu, p.load.q_pu);
}

const TxState& TxSimulator::step() {
  drain_pending();
  const SimTime next = state_.time.next(dt_tx_);
  state_ = solve_tx(network_, state_, next, options_);
  return state_;
}

const TxState& TxSimulator::resolve() {
  drain_pending();
  state_ = solve_tx(network_, state_, state_.time, options_);
  return state_;
}

TxRunResult run_tx_loop(TxSimulator& sim, const CosimConfig& config, std::int64_t ticks, const TxLoopHooks& hooks,
                        bool record_states) {
  using clock = std::chrono::steady_clock;
  TxRunResult result;
  if (record_states) result.states.reserve(static_cast<std::size_t>(ticks));

  const bool realtime = config.pacing_mode == PacingMode::RealTime;
  const auto dt = std::chrono::microseconds(sim.dt_tx() * kTickSizeUs);
  const double budget_s = ticks_to_seconds(sim.dt_tx());
  const auto start = clock::now();

  for (std::int64_t k = 1; k <= ticks; ++k) {
    if (hooks.keep_running && !hooks.keep_running()) {
      result.stopped_early = true;
      break;
    }
    if (realtime) std::this_thread::sleep_until(start + k * dt);
    const auto began = clock::now();
    const SimTime next = sim.state().time.next(sim.dt_tx());
    try {
      if (hooks.before_step) hooks.before_step(next);
      const TxState& s = sim.step();
      if (hooks.after_step) hooks.after_step(s);
      if (record_states) result.states.push_back(s);
    } catch (const SolverDivergence&) {
      throw;
    } catch (const std::exception& e) {
      throw HookError("transmission step " + std::to_string(k) + " (t=" + std::to_string(next.seconds()) +
                      " s) aborted: " + e.what());
    }
    result.ticks_completed = k;
    if (realtime) {
      const double compute_s = std::chrono::duration<double>(clock::now() - began).count();
      if (compute_s > budget_s) result.overruns.push_back({OverrunKind::TxStep, k, compute_s, budget_s});
    }
  }
  return result;
}

}  // namespace tdcosim::tx
