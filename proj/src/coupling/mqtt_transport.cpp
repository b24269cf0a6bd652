#include "tdcosim/coupling/mqtt_transport.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>

#include <spdlog/spdlog.h>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/coupling/topics.hpp"

namespace tdcosim::coupling {

using namespace std::chrono_literals;
using clock = std::chrono::steady_clock;

MqttOptions MqttOptions::from_env(std::string client_id) {
  MqttOptions o;
  o.client_id = std::move(client_id);
  if (const char* host = std::getenv("COSIM_MQTT_HOST"); host && *host) o.host = host;
  if (const char* port = std::getenv("COSIM_MQTT_PORT"); port && *port) {
    char* end = nullptr;
    const long v = std::strtol(port, &end, 10);
    if (*end != '\0' || v <= 0 || v > 65535) throw ConfigError(std::string("bad COSIM_MQTT_PORT '") + port + "'");
    o.port = static_cast<std::uint16_t>(v);
  }
  return o;
}

namespace {

int connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no address";
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    timeval tv{};
    tv.tv_sec = static_cast<long>(timeout.count() / 1000);
    tv.tv_usec = static_cast<long>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot reach MQTT broker at " + host + ":" + service + ": " + last_error);
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

bool send_all(int fd, const mqtt::Bytes& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const auto n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

MqttTransport::MqttTransport(MqttOptions options) : options_(std::move(options)) {
  if (options_.client_id.empty()) throw ConfigError("MQTT client id must not be empty");
  fd_ = open_session();
  last_send_ = clock::now();
  io_ = std::thread([this] { io_loop(); });
}

MqttTransport::~MqttTransport() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
    if (fd_ >= 0) {
      std::lock_guard wlock(write_mutex_);
      send_all(fd_, mqtt::encode_disconnect());
      ::shutdown(fd_, SHUT_RDWR);
    }
  }
  cv_.notify_all();
  if (io_.joinable()) io_.join();
  std::lock_guard lock(mutex_);
  if (fd_ >= 0) ::close(fd_);
}

int MqttTransport::open_session() {
  const int fd = connect_tcp(options_.host, options_.port, options_.connect_timeout);
  mqtt::ConnectOptions co;
  co.client_id = options_.client_id;
  co.keepalive_s = options_.keepalive_s;
  co.clean_session = true;
  if (!send_all(fd, mqtt::encode_connect(co))) {
    ::close(fd);
    throw TransportError("failed to send CONNECT");
  }
  mqtt::StreamDecoder decoder;
  std::uint8_t buf[256];
  const auto deadline = clock::now() + options_.connect_timeout;
  while (clock::now() < deadline) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    decoder.feed(buf, static_cast<std::size_t>(n));
    if (auto p = decoder.next()) {
      const auto ack = mqtt::parse_connack(*p);
      if (ack.return_code != 0) {
        ::close(fd);
        throw TransportError("MQTT broker refused connection: " + std::string(mqtt::connack_reason(ack.return_code)));
      }
      return fd;
    }
  }
  ::close(fd);
  throw TransportError("no CONNACK from MQTT broker at " + options_.host + ":" + std::to_string(options_.port));
}

bool MqttTransport::write(const mqtt::Bytes& bytes) {
  std::lock_guard lock(mutex_);
  return write_locked(bytes);
}

bool MqttTransport::write_locked(const mqtt::Bytes& bytes) {
  if (fd_ < 0) return false;
  std::lock_guard wlock(write_mutex_);
  if (!send_all(fd_, bytes)) {
    ::shutdown(fd_, SHUT_RDWR);  // the io thread notices and reconnects
    return false;
  }
  last_send_ = clock::now();
  return true;
}

void MqttTransport::close_socket_locked() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  ping_outstanding_ = false;
}

std::uint16_t MqttTransport::next_packet_id_locked() {
  for (int tries = 0; tries < 65535; ++tries) {
    last_packet_id_ = static_cast<std::uint16_t>(last_packet_id_ == 65535 ? 1 : last_packet_id_ + 1);
    if (!inflight_.count(last_packet_id_) && !suback_results_.count(last_packet_id_)) return last_packet_id_;
  }
  throw TransportError("no free MQTT packet identifiers");
}

void MqttTransport::publish(const std::string& topic, std::string payload) {
  if (!is_valid_topic_name(topic)) throw TransportError("invalid publish topic '" + topic + "'");
  std::lock_guard lock(mutex_);
  if (stopping_) throw TransportError("MQTT transport is shutting down");
  const auto id = next_packet_id_locked();
  mqtt::PublishPacket p{topic, payload, 1, false, false, id};
  inflight_.emplace(id, Inflight{topic, std::move(payload)});
  // While disconnected the message waits in inflight_ for the resend.
  write_locked(mqtt::encode_publish(p));
}

SubscriptionId MqttTransport::subscribe(const std::string& filter, MessageHandler handler) {
  const bool fresh = !handlers_.has_filter(filter);
  const auto sub = handlers_.add(filter, std::move(handler));
  if (!fresh) return sub;
  std::unique_lock lock(mutex_);
  const auto id = next_packet_id_locked();
  suback_results_.emplace(id, false);
  bool done = false;
  if (write_locked(mqtt::encode_subscribe(id, {{filter, 1}}))) {
    done = cv_.wait_for(lock, options_.suback_timeout, [&] { return stopping_ || suback_results_.at(id); });
  }
  suback_results_.erase(id);
  if (!done) {
    // A reconnect renews every filter in the table, so this is not fatal
    // once the session comes back; report it so callers can decide.
    lock.unlock();
    handlers_.remove(sub);
    throw TransportError("no SUBACK for '" + filter + "'");
  }
  return sub;
}

void MqttTransport::unsubscribe(SubscriptionId id) {
  const auto filter = handlers_.remove(id);
  if (filter.empty() || handlers_.has_filter(filter)) return;
  std::lock_guard lock(mutex_);
  write_locked(mqtt::encode_unsubscribe(next_packet_id_locked(), {filter}));
}

bool MqttTransport::connected() const {
  std::lock_guard lock(mutex_);
  return fd_ >= 0 && !stopping_;
}

std::size_t MqttTransport::inflight() const {
  std::lock_guard lock(mutex_);
  return inflight_.size();
}

std::uint64_t MqttTransport::reconnects() const {
  std::lock_guard lock(mutex_);
  return reconnects_;
}

bool MqttTransport::wait_acked(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] { return inflight_.empty(); });
}

void MqttTransport::drop_connection() {
  std::lock_guard lock(mutex_);
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void MqttTransport::on_connected_locked() {
  const auto filters = handlers_.filters();
  if (!filters.empty()) {
    std::vector<std::pair<std::string, std::uint8_t>> subs;
    for (const auto& f : filters) subs.emplace_back(f, 1);
    write_locked(mqtt::encode_subscribe(next_packet_id_locked(), subs));
  }
  for (const auto& [id, m] : inflight_) {
    write_locked(mqtt::encode_publish({m.topic, m.payload, 1, true, false, id}));
  }
}

void MqttTransport::handle_packet(const mqtt::RawPacket& p) {
  switch (p.type) {
    case mqtt::PacketType::Publish: {
      const auto msg = mqtt::parse_publish(p);
      handlers_.dispatch(msg.topic, msg.payload);
      if (msg.qos == 1) write(mqtt::encode_puback(msg.packet_id));
      break;
    }
    case mqtt::PacketType::Puback: {
      std::lock_guard lock(mutex_);
      inflight_.erase(mqtt::parse_packet_id(p));
      if (inflight_.empty()) cv_.notify_all();
      break;
    }
    case mqtt::PacketType::Suback: {
      const auto ack = mqtt::parse_suback(p);
      const bool ok = std::none_of(ack.return_codes.begin(), ack.return_codes.end(),
                                   [](std::uint8_t c) { return c == 0x80; });
      if (!ok) spdlog::warn("MQTT broker rejected a subscription (packet {})", ack.packet_id);
      std::lock_guard lock(mutex_);
      if (auto it = suback_results_.find(ack.packet_id); it != suback_results_.end()) it->second = ok;
      cv_.notify_all();
      break;
    }
    case mqtt::PacketType::Pingresp: {
      std::lock_guard lock(mutex_);
      ping_outstanding_ = false;
      break;
    }
    case mqtt::PacketType::Unsuback:
      break;
    default:
      spdlog::warn("ignoring MQTT packet type {}", static_cast<int>(p.type));
  }
}

void MqttTransport::io_loop() {
  mqtt::StreamDecoder decoder;
  auto delay = options_.reconnect_delay_min;
  std::uint8_t buf[4096];
  const auto keepalive = std::chrono::seconds(options_.keepalive_s);

  while (true) {
    int fd;
    {
      std::unique_lock lock(mutex_);
      if (stopping_) return;
      fd = fd_;
    }
    if (fd < 0) {
      try {
        const int nfd = open_session();
        std::lock_guard lock(mutex_);
        if (stopping_) {
          ::close(nfd);
          return;
        }
        fd_ = nfd;
        ++reconnects_;
        decoder.reset();
        last_send_ = clock::now();
        spdlog::info("MQTT client '{}' reconnected", options_.client_id);
        on_connected_locked();
        delay = options_.reconnect_delay_min;
      } catch (const TransportError& e) {
        spdlog::debug("MQTT reconnect failed: {}", e.what());
        std::unique_lock lock(mutex_);
        cv_.wait_for(lock, delay, [&] { return stopping_; });
        delay = std::min(delay * 2, options_.reconnect_delay_max);
      }
      continue;
    }

    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    bool lost = false;
    if (rc > 0) {
      const auto n = ::recv(fd, buf, sizeof buf, 0);
      if (n > 0) {
        decoder.feed(buf, static_cast<std::size_t>(n));
        try {
          while (auto p = decoder.next()) handle_packet(*p);
        } catch (const TransportError& e) {
          spdlog::error("MQTT protocol error: {}", e.what());
          lost = true;
        }
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        lost = true;
      }
    }

    std::lock_guard lock(mutex_);
    if (stopping_) return;
    const auto now = clock::now();
    if (!lost && options_.keepalive_s > 0) {
      if (ping_outstanding_ && now - ping_sent_ > keepalive) {
        spdlog::warn("MQTT keepalive expired for '{}'", options_.client_id);
        lost = true;
      } else if (!ping_outstanding_ && now - last_send_ > keepalive / 2) {
        ping_outstanding_ = write_locked(mqtt::encode_pingreq());
        ping_sent_ = now;
      }
    }
    if (lost) {
      spdlog::warn("MQTT connection for '{}' lost; reconnecting", options_.client_id);
      close_socket_locked();
    }
  }
}

}  // namespace tdcosim::coupling
