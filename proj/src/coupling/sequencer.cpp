#include "tdcosim/coupling/sequencer.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <cmath>
#include <limits>
#include <optional>

#include <spdlog/spdlog.h>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/coupling/inbox.hpp"
#include "tdcosim/coupling/wire.hpp"

namespace tdcosim::coupling {

std::string_view to_string(StalePolicy p) { return p == StalePolicy::HoldLast ? "hold_last" : "zero_load"; }

StalePolicy stale_policy_from_string(std::string_view name) {
  if (name == "hold_last") return StalePolicy::HoldLast;
  if (name == "zero_load") return StalePolicy::ZeroLoad;
  throw ConfigError("unknown stale policy '" + std::string(name) + "'");
}

namespace {

using steady = std::chrono::steady_clock;

class Run {
 public:
  Run(tx::TxSimulator& sim, Transport& transport, const TopicMap& topics, const CosimConfig& config,
      const SequencerOptions& options)
      : sim_(sim),
        transport_(transport),
        topics_(topics),
        config_(config),
        options_(options),
        poi_index_(sim.network().index_of(options.poi_bus)),
        realtime_(config.pacing_mode == PacingMode::RealTime) {
    const auto& load = sim.network().spot_loads()[poi_index_];
    p_mw_ = load.p_pu * config.base_mva_tx;
    q_mvar_ = load.q_pu * config.base_mva_tx;
  }

  SequencerReport execute(Ticks duration) {
    const Ticks step = config_.dt_cosim;
    const auto ticks = duration / sim_.dt_tx();
    const auto enqueue = [this](const std::string& topic, const std::string& payload) {
      inbox_.push(topic, payload);
    };
    const auto load_sub = transport_.subscribe(topics_.load_topic(), enqueue);
    const auto control_sub = transport_.subscribe(topics_.control_topic(), [this](const std::string&,
                                                                                  const std::string& payload) {
      try {
        if (decode_control(payload).cmd == "stop" && !stop_sent_) stop_requested_ = true;
      } catch (const TransportError&) {
      }
    });

    report_.states.push_back(sim_.state());
    report_.p_mw.push_back(p_mw_);
    report_.q_mvar.push_back(q_mvar_);

    tx::TxLoopHooks hooks;
    hooks.keep_running = [this] { return !stop_requested_ && report_.abort_reason.empty(); };
    hooks.before_step = [&](SimTime next) {
      if (next.ticks() % step == 0) {
        boundary(next, duration);
      } else if (realtime_) {
        drain(next);
      }
    };
    hooks.after_step = [this](const tx::TxState& s) {
      report_.states.push_back(s);
      report_.p_mw.push_back(p_mw_);
      report_.q_mvar.push_back(q_mvar_);
    };

    try {
      // Measurement 0 comes from the settled initial state.
      exchange_open(SimTime::at_step(0, step));
      if (!realtime_) exchange_close_logical(sim_.state().time.next(sim_.dt_tx()));
      const auto result = tx::run_tx_loop(sim_, config_, ticks, hooks, false);
      if (realtime_) settle_missed();
      report_.overruns.insert(report_.overruns.begin(), result.overruns.begin(), result.overruns.end());
      report_.complete = !result.stopped_early && report_.abort_reason.empty();
      if (stop_requested_ && report_.abort_reason.empty()) report_.abort_reason = "stop command received";
    } catch (const std::exception& e) {
      report_.abort_reason = e.what();
    }

    if (options_.send_stop) {
      try {
        stop_sent_ = true;
        transport_.publish(topics_.control_topic(), encode(ControlMessage{"stop"}));
      } catch (const TransportError& e) {
        spdlog::warn("could not publish stop: {}", e.what());
      }
    }
    transport_.unsubscribe(load_sub);
    transport_.unsubscribe(control_sub);
    return std::move(report_);
  }

 private:
  void boundary(SimTime now, Ticks duration) {
    if (realtime_) {
      drain(now);
      if (outstanding_) {
        // The reply stays awaited so its real delay can be reported when
        // (if) it arrives; the window it had becomes the overrun budget.
        auto& w = awaiting_.at(outstanding_->step_index());
        w.missed = true;
        w.window_s = std::chrono::duration<double>(steady::now() - w.published).count();
        spdlog::debug("no load reply for step {} by t={} s", outstanding_->step_index(), now.seconds());
        apply_stale(now);
        outstanding_.reset();
      }
    }
    if (now.ticks() >= duration) return;
    const SimTime stamp = SimTime::at_step(now.ticks() / config_.dt_cosim, config_.dt_cosim);
    if (!exchange_open(stamp)) return;
    if (!realtime_) exchange_close_logical(now);
  }

  /// After a real-time run, waits a bounded time for replies that missed
  /// their boundary and closes out the ones that never come.
  void settle_missed() {
    const auto grace = std::chrono::duration_cast<steady::duration>(
        std::chrono::duration<double>(config_.dt_cosim_seconds() + 1.0));
    const auto deadline = steady::now() + grace;
    const auto any_missed = [&] {
      return std::any_of(awaiting_.begin(), awaiting_.end(), [](const auto& e) { return e.second.missed; });
    };
    while (any_missed() && steady::now() < deadline) {
      if (auto item = inbox_.pop_for(std::chrono::milliseconds(5))) take(*item, sim_.state().time);
    }
    for (const auto& [k, w] : awaiting_) {
      if (!w.missed) continue;
      const double waited = std::chrono::duration<double>(steady::now() - w.published).count();
      report_.overruns.push_back({OverrunKind::CosimLoop, k, waited, w.window_s});
    }
  }

  bool exchange_open(SimTime stamp) {
    const auto& v = sim_.state().bus_voltages[poi_index_];
    Measurement m{stamp, topics_.poi_id(), std::abs(v), std::arg(v), sim_.state().freq_hz};
    try {
      awaiting_[stamp.step_index()] = Awaiting{steady::now()};
      transport_.publish(topics_.measurement_topic(), encode(WireMeasurement{m, ++seq_, topics_.run_id()}));
    } catch (const TransportError& e) {
      awaiting_.erase(stamp.step_index());
      report_.abort_reason = std::string("transport failure: ") + e.what();
      return false;
    }
    report_.measurements.push_back(m);
    outstanding_ = stamp;
    return true;
  }

  void exchange_close_logical(SimTime now) {
    const auto deadline = steady::now() + options_.logical_reply_timeout;
    while (outstanding_) {
      if (options_.pump) options_.pump();
      const auto left = deadline - steady::now();
      if (left <= steady::duration::zero()) break;
      const auto slice = options_.pump ? std::min<steady::duration>(left, std::chrono::milliseconds(1)) : left;
      if (auto item = inbox_.pop_for(slice)) take(*item, now);
    }
    while (auto item = inbox_.try_pop()) take(*item, now);
    if (outstanding_) {
      awaiting_.erase(outstanding_->step_index());
      ++report_.logical_timeouts;
      spdlog::warn("no load reply for step {} within {} ms", outstanding_->step_index(),
                   options_.logical_reply_timeout.count());
      apply_stale(now);
      outstanding_.reset();
    }
  }

  void drain(SimTime now) {
    while (auto item = inbox_.try_pop()) take(*item, now);
  }

  void take(const InboxItem& item, SimTime now) {
    WireLoadUpdate w;
    try {
      w = decode_load_update(item.payload);
    } catch (const TransportError& e) {
      ++report_.decode_errors;
      spdlog::warn("dropping undecodable load update: {}", e.what());
      return;
    }
    if (last_seq_ && w.seq <= *last_seq_) {
      ++report_.duplicates_dropped;
      return;
    }
    last_seq_ = w.seq;
    const auto k = w.message.timestamp.step_index();
    const auto it = awaiting_.find(k);
    if (it == awaiting_.end() || w.message.timestamp != SimTime::at_step(k, config_.dt_cosim)) {
      ++report_.late_discarded;
      return;
    }
    const Awaiting a = it->second;
    awaiting_.erase(it);
    report_.delays.push_back({k, a.published, item.received});
    if (a.missed) {
      const double delay = report_.delays.back().delay_s();
      report_.overruns.push_back({OverrunKind::CosimLoop, k, delay, a.window_s});
      ++report_.late_discarded;
      return;
    }
    if (!outstanding_ || *outstanding_ != w.message.timestamp) {
      ++report_.late_discarded;
      return;
    }
    outstanding_.reset();
    if (!w.message.converged) {
      ++report_.nonconverged_replies;
      apply_stale(now);
      return;
    }
    apply(now, w.message);
  }

  void apply(SimTime now, const LoadUpdate& u) {
    p_mw_ = u.p_mw;
    q_mvar_ = u.q_mvar;
    sim_.post_spot_load(options_.poi_bus, p_mw_ / config_.base_mva_tx, q_mvar_ / config_.base_mva_tx);
    report_.applied.push_back({now, u});
  }

  void apply_stale(SimTime now) {
    ++report_.stale_steps;
    if (options_.stale_policy == StalePolicy::ZeroLoad) {
      LoadUpdate zero;
      zero.timestamp = outstanding_ ? *outstanding_ : now;
      zero.feeder_id = topics_.feeder_id();
      zero.converged = false;
      apply(now, zero);
    }
  }

  tx::TxSimulator& sim_;
  Transport& transport_;
  const TopicMap& topics_;
  const CosimConfig& config_;
  const SequencerOptions& options_;
  const std::size_t poi_index_;
  const bool realtime_;

  Inbox inbox_;
  SequencerReport report_;
  double p_mw_ = 0.0;
  double q_mvar_ = 0.0;
  std::uint64_t seq_ = 0;
  std::optional<std::uint64_t> last_seq_;
  std::optional<SimTime> outstanding_;
  struct Awaiting {
    steady::time_point published;
    bool missed = false;
    double window_s = 0.0;
  };
  std::map<std::int64_t, Awaiting> awaiting_;
  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> stop_sent_{false};
};

}  // namespace

int settle_initial_state(tx::TxSimulator& sim, DxModel& dx, const std::string& poi_bus, const CosimConfig& config,
                         double tolerance_mw, int max_iterations) {
  const auto bus = sim.network().index_of(poi_bus);
  double last_p = std::numeric_limits<double>::infinity();
  double last_q = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= max_iterations; ++i) {
    const auto& v = sim.state().bus_voltages[bus];
    const auto r = dx.solve(sim.state().time, std::abs(v), std::arg(v), sim.state().freq_hz);
    if (!r.load.converged) throw SolverDivergence(poi_bus, std::numeric_limits<double>::infinity());
    sim.post_spot_load(poi_bus, r.load.p_mw / config.base_mva_tx, r.load.q_mvar / config.base_mva_tx);
    sim.resolve();
    if (std::abs(r.load.p_mw - last_p) <= tolerance_mw && std::abs(r.load.q_mvar - last_q) <= tolerance_mw) return i;
    last_p = r.load.p_mw;
    last_q = r.load.q_mvar;
  }
  throw SolverDivergence(poi_bus, std::abs(last_p));
}

SequencerReport sequencer_run(tx::TxSimulator& sim, Transport& transport, const TopicMap& topics,
                              const CosimConfig& config, Ticks duration, const SequencerOptions& options) {
  config.validate();
  ticks_per_cosim_step(config);
  if (duration <= 0 || duration % sim.dt_tx() != 0) {
    throw ConfigError("run duration must be a positive whole number of transmission ticks");
  }
  if (sim.dt_tx() != config.dt_tx) throw ConfigError("simulator dt_tx differs from the configured dt_tx");
  if (sim.state().time.ticks() != 0) throw ConfigError("sequencer_run expects a simulator at t=0");
  Run run(sim, transport, topics, config, options);
  return run.execute(duration);
}

}  // namespace tdcosim::coupling
