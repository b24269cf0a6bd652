#pragma once

// MQTT 3.1.1 control packet encoding and a streaming decoder.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdcosim::coupling::mqtt {

using Bytes = std::vector<std::uint8_t>;

enum class PacketType : std::uint8_t {
  Connect = 1,
  Connack = 2,
  Publish = 3,
  Puback = 4,
  Pubrec = 5,
  Pubrel = 6,
  Pubcomp = 7,
  Subscribe = 8,
  Suback = 9,
  Unsubscribe = 10,
  Unsuback = 11,
  Pingreq = 12,
  Pingresp = 13,
  Disconnect = 14,
};

struct ConnectOptions {
  std::string client_id;
  std::uint16_t keepalive_s = 30;
  bool clean_session = true;
};

struct PublishPacket {
  std::string topic;
  std::string payload;
  std::uint8_t qos = 0;
  bool dup = false;
  bool retain = false;
  std::uint16_t packet_id = 0;
};

/// A framed packet as read off the wire.
struct RawPacket {
  PacketType type;
  std::uint8_t flags;
  Bytes body;
};

void encode_remaining_length(std::size_t length, Bytes& out);

Bytes encode_connect(const ConnectOptions& options);
Bytes encode_publish(const PublishPacket& p);
Bytes encode_puback(std::uint16_t packet_id);
Bytes encode_subscribe(std::uint16_t packet_id, const std::vector<std::pair<std::string, std::uint8_t>>& filters);
Bytes encode_unsubscribe(std::uint16_t packet_id, const std::vector<std::string>& filters);
Bytes encode_pingreq();
Bytes encode_disconnect();

/// Accumulates bytes and yields complete packets. Throws TransportError on
/// a malformed length prefix.
class StreamDecoder {
 public:
  void feed(const std::uint8_t* data, std::size_t n);
  std::optional<RawPacket> next();
  void reset() { buffer_.clear(); }

 private:
  Bytes buffer_;
};

// Body parsers; each throws TransportError when the body is malformed.
struct Connack {
  bool session_present = false;
  std::uint8_t return_code = 0;
};
Connack parse_connack(const RawPacket& p);
PublishPacket parse_publish(const RawPacket& p);
std::uint16_t parse_packet_id(const RawPacket& p);  // PUBACK, UNSUBACK
struct Suback {
  std::uint16_t packet_id = 0;
  std::vector<std::uint8_t> return_codes;
};
Suback parse_suback(const RawPacket& p);

std::string_view connack_reason(std::uint8_t code);

}  // namespace tdcosim::coupling::mqtt
