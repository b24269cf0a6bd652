#include "tdcosim/coupling/endpoint.hpp"

#include <spdlog/spdlog.h>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/coupling/wire.hpp"

namespace tdcosim::coupling {

DistributionEndpoint::DistributionEndpoint(Transport& transport, TopicMap topics, DxModel model,
                                           EndpointOptions options)
    : transport_(transport), topics_(std::move(topics)), model_(std::move(model)), options_(options) {}

DistributionEndpoint::~DistributionEndpoint() { stop(); }

void DistributionEndpoint::start() {
  if (running_.exchange(true)) return;
  auto enqueue = [this](const std::string& topic, const std::string& payload) { inbox_.push(topic, payload); };
  subs_.push_back(transport_.subscribe(topics_.measurement_topic(), enqueue));
  subs_.push_back(transport_.subscribe(topics_.control_topic(), enqueue));
  worker_ = std::thread([this] { run(); });
}

void DistributionEndpoint::stop() {
  inbox_.close();
  if (worker_.joinable()) worker_.join();
  for (auto id : subs_) transport_.unsubscribe(id);
  subs_.clear();
  running_ = false;
}

void DistributionEndpoint::wait() {
  if (worker_.joinable()) worker_.join();
}

EndpointRecord DistributionEndpoint::record() const {
  std::lock_guard lock(record_mutex_);
  return record_;
}

std::optional<SimTime> DistributionEndpoint::now() const {
  std::lock_guard lock(record_mutex_);
  return clock_.now();
}

void DistributionEndpoint::run() {
  while (true) {
    auto item = inbox_.pop_for(std::chrono::milliseconds(200));
    if (!item) {
      if (inbox_.closed()) break;
      continue;
    }
    if (item->topic == topics_.control_topic()) {
      try {
        if (decode_control(item->payload).cmd == "stop") {
          spdlog::debug("distribution endpoint '{}' received stop", topics_.feeder_id());
          break;
        }
      } catch (const TransportError& e) {
        spdlog::warn("ignoring control message: {}", e.what());
      }
      continue;
    }
    try {
      handle(*item);
    } catch (const std::exception& e) {
      // A failed solve loses one reply; the sequencer's stale policy covers it.
      spdlog::error("distribution endpoint step failed: {}", e.what());
    }
  }
  running_ = false;
}

void DistributionEndpoint::handle(const InboxItem& item) {
  WireMeasurement msg;
  try {
    msg = decode_measurement(item.payload);
  } catch (const TransportError& e) {
    std::lock_guard lock(record_mutex_);
    ++record_.decode_errors;
    spdlog::warn("dropping undecodable measurement: {}", e.what());
    return;
  }
  std::optional<SimTime> now;
  {
    std::lock_guard lock(record_mutex_);
    now = sync_timestamp(clock_, msg);
    record_.duplicates = clock_.duplicates();
    record_.regressions = clock_.regressions();
  }
  if (!now) return;
  if (options_.die_after_steps && solved_ >= *options_.die_after_steps) return;

  const auto& m = msg.message;
  auto result = model_.solve(*now, m.v_mag_pu, m.v_angle_rad, m.freq_hz);
  if (options_.processing_delay.count() > 0) std::this_thread::sleep_for(options_.processing_delay);
  ++solved_;

  WireLoadUpdate reply{result.load, ++seq_, topics_.run_id()};
  {
    std::lock_guard lock(record_mutex_);
    record_.replies.push_back(result.load);
    if (result.overrun) record_.overruns.push_back(*result.overrun);
    if (options_.record_der_outputs) {
      record_.der_outputs.push_back({now->step_index(), now->seconds(), result.pf.outputs.per_der});
    }
  }
  transport_.publish(topics_.load_topic(), encode(reply));
}

}  // namespace tdcosim::coupling
