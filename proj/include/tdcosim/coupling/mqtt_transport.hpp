#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "tdcosim/coupling/mqtt_codec.hpp"
#include "tdcosim/coupling/transport.hpp"

namespace tdcosim::coupling {

struct MqttOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 1883;
  std::string client_id;
  std::uint16_t keepalive_s = 30;
  std::chrono::milliseconds connect_timeout{3000};
  std::chrono::milliseconds suback_timeout{3000};
  std::chrono::milliseconds reconnect_delay_min{50};
  std::chrono::milliseconds reconnect_delay_max{2000};

  /// Host and port from COSIM_MQTT_HOST / COSIM_MQTT_PORT when set.
  static MqttOptions from_env(std::string client_id);
};

/// MQTT 3.1.1 client, QoS 1 and clean session. The constructor connects and
/// throws TransportError when the broker is unreachable or refuses. After
/// that a lost connection is re-established in the background with
/// exponential backoff; subscriptions are renewed and unacknowledged
/// publishes are resent with the DUP flag, so delivery is at least once.
class MqttTransport : public Transport {
 public:
  explicit MqttTransport(MqttOptions options);
  ~MqttTransport() override;

  MqttTransport(const MqttTransport&) = delete;
  MqttTransport& operator=(const MqttTransport&) = delete;

  void publish(const std::string& topic, std::string payload) override;
  /// Blocks until the broker acknowledges the subscription.
  SubscriptionId subscribe(const std::string& filter, MessageHandler handler) override;
  void unsubscribe(SubscriptionId id) override;
  bool connected() const override;
  std::uint64_t handler_failures() const override { return handlers_.failures(); }

  /// Waits until every publish has been acknowledged.
  bool wait_acked(std::chrono::milliseconds timeout);

  std::size_t inflight() const;
  std::uint64_t reconnects() const;

  /// Severs the socket without a DISCONNECT, as a network fault would.
  void drop_connection();

 private:
  struct Inflight {
    std::string topic;
    std::string payload;
  };

  int open_session();  // returns a connected socket after CONNACK
  void io_loop();
  void on_connected_locked();
  void handle_packet(const mqtt::RawPacket& p);
  bool write(const mqtt::Bytes& bytes);
  bool write_locked(const mqtt::Bytes& bytes);
  void close_socket_locked();
  std::uint16_t next_packet_id_locked();

  MqttOptions options_;
  HandlerTable handlers_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int fd_ = -1;
  bool stopping_ = false;
  std::uint64_t reconnects_ = 0;
  std::uint16_t last_packet_id_ = 0;
  std::map<std::uint16_t, Inflight> inflight_;
  std::map<std::uint16_t, bool> suback_results_;
  std::chrono::steady_clock::time_point last_send_;
  bool ping_outstanding_ = false;
  std::chrono::steady_clock::time_point ping_sent_;
  std::mutex write_mutex_;
  std::thread io_;
};

}  // namespace tdcosim::coupling
