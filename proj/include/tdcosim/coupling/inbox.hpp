#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <string>

namespace tdcosim::coupling {

struct InboxItem {
  std::string topic;
  std::string payload;
  std::chrono::steady_clock::time_point received;
};

/// Thread-safe queue filled by transport handlers and drained by the owning
/// loop. Handlers never do more than push().
class Inbox {
 public:
  void push(std::string topic, std::string payload) {
    {
      std::lock_guard lock(mutex_);
      items_.push_back({std::move(topic), std::move(payload), std::chrono::steady_clock::now()});
    }
    cv_.notify_all();
  }

  std::optional<InboxItem> try_pop() {
    std::lock_guard lock(mutex_);
    if (items_.empty()) return std::nullopt;
    auto item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  /// Waits up to `timeout` for an item, or until close().
  std::optional<InboxItem> pop_for(std::chrono::steady_clock::duration timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    auto item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<InboxItem> items_;
  bool closed_ = false;
};

}  // namespace tdcosim::coupling
