#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "tdcosim/coupling/clock.hpp"
#include "tdcosim/coupling/dx_model.hpp"
#include "tdcosim/coupling/inbox.hpp"
#include "tdcosim/coupling/topics.hpp"
#include "tdcosim/coupling/transport.hpp"

namespace tdcosim::coupling {

struct EndpointOptions {
  /// Artificial compute delay added before each reply.
  std::chrono::milliseconds processing_delay{0};
  /// Stop replying after this many solved steps, emulating a crash.
  std::optional<std::int64_t> die_after_steps;
  /// Keep per-DER outputs for every solved step.
  bool record_der_outputs = true;
};

struct EndpointRecord {
  std::vector<LoadUpdate> replies;
  std::vector<der::DerStepRecord> der_outputs;
  std::vector<OverrunEvent> overruns;
  std::uint64_t duplicates = 0;
  std::uint64_t regressions = 0;
  std::uint64_t decode_errors = 0;
};

/// Distribution side of the co-simulation. Measurement handlers only fill
/// the inbox; a dedicated worker thread decodes, adopts the master clock,
/// solves and publishes the LoadUpdate. {"cmd":"stop"} on the control topic
/// ends the worker.
class DistributionEndpoint {
 public:
  DistributionEndpoint(Transport& transport, TopicMap topics, DxModel model, EndpointOptions options = {});
  ~DistributionEndpoint();

  DistributionEndpoint(const DistributionEndpoint&) = delete;
  DistributionEndpoint& operator=(const DistributionEndpoint&) = delete;

  void start();
  void stop();
  /// Blocks until a stop command arrives or stop() is called.
  void wait();
  bool running() const { return running_.load(); }

  /// Copy of everything recorded so far.
  EndpointRecord record() const;
  std::optional<SimTime> now() const;

 private:
  void run();
  void handle(const InboxItem& item);

  Transport& transport_;
  TopicMap topics_;
  DxModel model_;
  EndpointOptions options_;
  Inbox inbox_;
  ClockFollower clock_;
  std::uint64_t seq_ = 0;
  std::int64_t solved_ = 0;
  std::vector<SubscriptionId> subs_;
  mutable std::mutex record_mutex_;
  EndpointRecord record_;
  std::atomic<bool> running_{false};
  std::thread worker_;
};

}  // namespace tdcosim::coupling
