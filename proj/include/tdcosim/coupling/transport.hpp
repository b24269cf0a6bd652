#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace tdcosim::coupling {

using MessageHandler = std::function<void(const std::string& topic, const std::string& payload)>;
using SubscriptionId = std::uint64_t;

/// Publish/subscribe endpoint. publish() enqueues and returns; handlers run
/// on a transport-owned context, once per delivered message, in per-topic
/// publish order. A throwing handler is logged and counted and never stops
/// delivery to other handlers.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void publish(const std::string& topic, std::string payload) = 0;
  virtual SubscriptionId subscribe(const std::string& filter, MessageHandler handler) = 0;
  virtual void unsubscribe(SubscriptionId id) = 0;
  virtual bool connected() const = 0;
  virtual std::uint64_t handler_failures() const = 0;
};

/// Filter-to-handler table shared by transport implementations.
class HandlerTable {
 public:
  SubscriptionId add(std::string filter, MessageHandler handler);
  /// Returns the filter of the removed entry, or empty when unknown.
  std::string remove(SubscriptionId id);
  bool has_filter(const std::string& filter) const;
  std::vector<std::string> filters() const;

  /// Invokes every matching handler, isolating failures.
  void dispatch(const std::string& topic, const std::string& payload);

  std::uint64_t failures() const { return failures_.load(); }

 private:
  struct Entry {
    std::string filter;
    std::shared_ptr<MessageHandler> handler;
  };
  mutable std::mutex mutex_;
  std::map<SubscriptionId, Entry> entries_;
  SubscriptionId next_id_ = 1;
  std::atomic<std::uint64_t> failures_{0};
};

/// In-process broker. Manual mode delivers only inside poll(), which makes
/// tests fully deterministic; Threaded mode runs one dispatcher thread that
/// delivers in global publish order.
class LoopbackBroker : public std::enable_shared_from_this<LoopbackBroker> {
 public:
  enum class Mode { Manual, Threaded };

  static std::shared_ptr<LoopbackBroker> create(Mode mode);
  ~LoopbackBroker();

  LoopbackBroker(const LoopbackBroker&) = delete;
  LoopbackBroker& operator=(const LoopbackBroker&) = delete;

  /// A client session attached to this broker.
  std::unique_ptr<Transport> connect(std::string client_id);

  /// Manual mode: delivers everything queued, including messages published
  /// by handlers during this call. Returns the number delivered.
  std::size_t poll();

  /// Blocks until the queue is empty and no delivery is in flight.
  void flush();

  void shutdown();
  Mode mode() const { return mode_; }
  std::uint64_t published() const { return published_.load(); }

 private:
  class Session;
  friend class Session;

  explicit LoopbackBroker(Mode mode);
  void enqueue(std::string topic, std::string payload);
  void deliver(const std::string& topic, const std::string& payload);
  void attach(Session* s);
  void detach(Session* s);
  void run_dispatcher();

  Mode mode_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::pair<std::string, std::string>> queue_;
  std::vector<Session*> sessions_;
  bool delivering_ = false;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> published_{0};
  std::mutex delivery_mutex_;
  std::thread dispatcher_;
};

/// Test decorator that forwards every publish twice.
class DuplicatingTransport : public Transport {
 public:
  explicit DuplicatingTransport(std::unique_ptr<Transport> inner) : inner_(std::move(inner)) {}

  void publish(const std::string& topic, std::string payload) override {
    inner_->publish(topic, payload);
    inner_->publish(topic, std::move(payload));
  }
  SubscriptionId subscribe(const std::string& filter, MessageHandler handler) override {
    return inner_->subscribe(filter, std::move(handler));
  }
  void unsubscribe(SubscriptionId id) override { inner_->unsubscribe(id); }
  bool connected() const override { return inner_->connected(); }
  std::uint64_t handler_failures() const override { return inner_->handler_failures(); }

 private:
  std::unique_ptr<Transport> inner_;
};

}  // namespace tdcosim::coupling
