#include "tdcosim/coupling/mqtt_codec.hpp"

#include "tdcosim/core/errors.hpp"

namespace tdcosim::coupling::mqtt {

namespace {

constexpr std::size_t kMaxRemainingLength = 268'435'455;

void put_u16(std::uint16_t v, Bytes& out) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_string(std::string_view s, Bytes& out) {
  if (s.size() > 0xFFFF) throw TransportError("MQTT string exceeds 65535 bytes");
  put_u16(static_cast<std::uint16_t>(s.size()), out);
  out.insert(out.end(), s.begin(), s.end());
}

Bytes frame(std::uint8_t first_byte, const Bytes& body) {
  Bytes out;
  out.reserve(body.size() + 5);
  out.push_back(first_byte);
  encode_remaining_length(body.size(), out);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

class Reader {
 public:
  explicit Reader(const Bytes& b) : b_(b) {}
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((b_[pos_] << 8) | b_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::string str() {
    const auto n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string rest() {
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), b_.size() - pos_);
    pos_ = b_.size();
    return s;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw TransportError("truncated MQTT packet");
  }
  const Bytes& b_;
  std::size_t pos_ = 0;
};

void expect(const RawPacket& p, PacketType t) {
  if (p.type != t) throw TransportError("unexpected MQTT packet type");
}

}  // namespace

void encode_remaining_length(std::size_t length, Bytes& out) {
  if (length > kMaxRemainingLength) throw TransportError("MQTT packet too large");
  do {
    auto byte = static_cast<std::uint8_t>(length % 128);
    length /= 128;
    if (length > 0) byte |= 0x80;
    out.push_back(byte);
  } while (length > 0);
}

Bytes encode_connect(const ConnectOptions& o) {
  Bytes body;
  put_string("MQTT", body);
  body.push_back(4);  // protocol level 3.1.1
  body.push_back(o.clean_session ? 0x02 : 0x00);
  put_u16(o.keepalive_s, body);
  put_string(o.client_id, body);
  return frame(0x10, body);
}

Bytes encode_publish(const PublishPacket& p) {
  if (p.qos > 1) throw TransportError("QoS 2 is not supported");
  Bytes body;
  put_string(p.topic, body);
  if (p.qos > 0) put_u16(p.packet_id, body);
  body.insert(body.end(), p.payload.begin(), p.payload.end());
  std::uint8_t first = 0x30 | static_cast<std::uint8_t>(p.qos << 1);
  if (p.dup) first |= 0x08;
  if (p.retain) first |= 0x01;
  return frame(first, body);
}

Bytes encode_puback(std::uint16_t packet_id) {
  Bytes body;
  put_u16(packet_id, body);
  return frame(0x40, body);
}

Bytes encode_subscribe(std::uint16_t packet_id, const std::vector<std::pair<std::string, std::uint8_t>>& filters) {
  Bytes body;
  put_u16(packet_id, body);
  for (const auto& [f, qos] : filters) {
    put_string(f, body);
    body.push_back(qos);
  }
  return frame(0x82, body);
}

Bytes encode_unsubscribe(std::uint16_t packet_id, const std::vector<std::string>& filters) {
  Bytes body;
  put_u16(packet_id, body);
  for (const auto& f : filters) put_string(f, body);
  return frame(0xA2, body);
}

Bytes encode_pingreq() { return {0xC0, 0x00}; }
Bytes encode_disconnect() { return {0xE0, 0x00}; }

void StreamDecoder::feed(const std::uint8_t* data, std::size_t n) { buffer_.insert(buffer_.end(), data, data + n); }

std::optional<RawPacket> StreamDecoder::next() {
  if (buffer_.size() < 2) return std::nullopt;
  std::size_t length = 0;
  std::size_t multiplier = 1;
  std::size_t pos = 1;
  while (true) {
    if (pos >= buffer_.size()) return std::nullopt;
    if (pos > 4) throw TransportError("malformed MQTT remaining length");
    const auto byte = buffer_[pos++];
    length += (byte & 0x7F) * multiplier;
    multiplier *= 128;
    if ((byte & 0x80) == 0) break;
  }
  if (buffer_.size() < pos + length) return std::nullopt;
  RawPacket p;
  p.type = static_cast<PacketType>(buffer_[0] >> 4);
  p.flags = buffer_[0] & 0x0F;
  p.body.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(pos),
                buffer_.begin() + static_cast<std::ptrdiff_t>(pos + length));
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos + length));
  return p;
}

Connack parse_connack(const RawPacket& p) {
  expect(p, PacketType::Connack);
  Reader r(p.body);
  Connack c;
  c.session_present = (r.u8() & 0x01) != 0;
  c.return_code = r.u8();
  return c;
}

PublishPacket parse_publish(const RawPacket& p) {
  expect(p, PacketType::Publish);
  Reader r(p.body);
  PublishPacket out;
  out.qos = (p.flags >> 1) & 0x03;
  out.dup = (p.flags & 0x08) != 0;
  out.retain = (p.flags & 0x01) != 0;
  if (out.qos > 2) throw TransportError("invalid QoS in PUBLISH");
  out.topic = r.str();
  if (out.qos > 0) out.packet_id = r.u16();
  out.payload = r.rest();
  return out;
}

std::uint16_t parse_packet_id(const RawPacket& p) {
  Reader r(p.body);
  return r.u16();
}

Suback parse_suback(const RawPacket& p) {
  expect(p, PacketType::Suback);
  Reader r(p.body);
  Suback s;
  s.packet_id = r.u16();
  while (r.remaining() > 0) s.return_codes.push_back(r.u8());
  return s;
}

std::string_view connack_reason(std::uint8_t code) {
  switch (code) {
    case 0: return "accepted";
    case 1: return "unacceptable protocol version";
    case 2: return "identifier rejected";
    case 3: return "server unavailable";
    case 4: return "bad user name or password";
    case 5: return "not authorized";
  }
  return "unknown return code";
}

}  // namespace tdcosim::coupling::mqtt
