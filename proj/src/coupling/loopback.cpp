#include <algorithm>

#include <spdlog/spdlog.h>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/coupling/topics.hpp"
#include "tdcosim/coupling/transport.hpp"

namespace tdcosim::coupling {

SubscriptionId HandlerTable::add(std::string filter, MessageHandler handler) {
  std::lock_guard lock(mutex_);
  const auto id = next_id_++;
  entries_.emplace(id, Entry{std::move(filter), std::make_shared<MessageHandler>(std::move(handler))});
  return id;
}

std::string HandlerTable::remove(SubscriptionId id) {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return {};
  auto filter = std::move(it->second.filter);
  entries_.erase(it);
  return filter;
}

bool HandlerTable::has_filter(const std::string& filter) const {
  std::lock_guard lock(mutex_);
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.second.filter == filter; });
}

std::vector<std::string> HandlerTable::filters() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) {
    if (std::find(out.begin(), out.end(), e.filter) == out.end()) out.push_back(e.filter);
  }
  return out;
}

void HandlerTable::dispatch(const std::string& topic, const std::string& payload) {
  std::vector<std::shared_ptr<MessageHandler>> targets;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, e] : entries_) {
      if (topic_matches(e.filter, topic)) targets.push_back(e.handler);
    }
  }
  for (const auto& h : targets) {
    try {
      (*h)(topic, payload);
    } catch (const std::exception& ex) {
      ++failures_;
      spdlog::error("handler for '{}' failed: {}", topic, ex.what());
    } catch (...) {
      ++failures_;
      spdlog::error("handler for '{}' failed with a non-standard exception", topic);
    }
  }
}

class LoopbackBroker::Session : public Transport {
 public:
  Session(std::shared_ptr<LoopbackBroker> broker, std::string client_id)
      : broker_(std::move(broker)), client_id_(std::move(client_id)) {
    broker_->attach(this);
  }
  ~Session() override { broker_->detach(this); }

  void publish(const std::string& topic, std::string payload) override {
    if (!is_valid_topic_name(topic)) throw TransportError("invalid publish topic '" + topic + "'");
    broker_->enqueue(topic, std::move(payload));
  }
  SubscriptionId subscribe(const std::string& filter, MessageHandler handler) override {
    return handlers_.add(filter, std::move(handler));
  }
  void unsubscribe(SubscriptionId id) override { handlers_.remove(id); }
  bool connected() const override { return !broker_->stopping_; }
  std::uint64_t handler_failures() const override { return handlers_.failures(); }

  HandlerTable handlers_;

 private:
  std::shared_ptr<LoopbackBroker> broker_;
  std::string client_id_;
};

std::shared_ptr<LoopbackBroker> LoopbackBroker::create(Mode mode) {
  auto b = std::shared_ptr<LoopbackBroker>(new LoopbackBroker(mode));
  if (mode == Mode::Threaded) b->dispatcher_ = std::thread([raw = b.get()] { raw->run_dispatcher(); });
  return b;
}

LoopbackBroker::LoopbackBroker(Mode mode) : mode_(mode) {}

LoopbackBroker::~LoopbackBroker() { shutdown(); }

std::unique_ptr<Transport> LoopbackBroker::connect(std::string client_id) {
  return std::make_unique<Session>(shared_from_this(), std::move(client_id));
}

void LoopbackBroker::attach(Session* s) {
  std::lock_guard lock(delivery_mutex_);
  sessions_.push_back(s);
}

void LoopbackBroker::detach(Session* s) {
  std::lock_guard lock(delivery_mutex_);
  sessions_.erase(std::remove(sessions_.begin(), sessions_.end(), s), sessions_.end());
}

void LoopbackBroker::enqueue(std::string topic, std::string payload) {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) throw TransportError("loopback broker is shut down");
    queue_.emplace_back(std::move(topic), std::move(payload));
  }
  ++published_;
  cv_.notify_one();
}

void LoopbackBroker::deliver(const std::string& topic, const std::string& payload) {
  // Holding the delivery lock keeps sessions alive for the whole fan-out.
  std::lock_guard lock(delivery_mutex_);
  for (auto* s : sessions_) s->handlers_.dispatch(topic, payload);
}

std::size_t LoopbackBroker::poll() {
  if (mode_ != Mode::Manual) throw TransportError("poll() is only valid on a manual loopback broker");
  std::size_t n = 0;
  while (true) {
    std::pair<std::string, std::string> item;
    {
      std::lock_guard lock(mutex_);
      if (queue_.empty()) break;
      item = std::move(queue_.front());
      queue_.pop_front();
    }
    deliver(item.first, item.second);
    ++n;
  }
  return n;
}

void LoopbackBroker::run_dispatcher() {
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (queue_.empty()) break;
    auto item = std::move(queue_.front());
    queue_.pop_front();
    delivering_ = true;
    lock.unlock();
    deliver(item.first, item.second);
    lock.lock();
    delivering_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
  idle_cv_.notify_all();
}

void LoopbackBroker::flush() {
  if (mode_ == Mode::Manual) {
    poll();
    return;
  }
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return stopping_ || (queue_.empty() && !delivering_); });
}

void LoopbackBroker::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
    // Threaded mode drains what is already queued before exiting.
  }
  cv_.notify_all();
  if (dispatcher_.joinable()) dispatcher_.join();
}

}  // namespace tdcosim::coupling
