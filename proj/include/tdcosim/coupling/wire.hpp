#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tdcosim/core/messages.hpp"

namespace tdcosim::coupling {

inline constexpr int kSchemaVersion = 1;

/// Message plus the publisher's envelope.
template <typename T>
struct Wire {
  T message;
  std::uint64_t seq = 0;
  std::string run_id;

  friend bool operator==(const Wire&, const Wire&) = default;
};

using WireMeasurement = Wire<Measurement>;
using WireLoadUpdate = Wire<LoadUpdate>;

struct ControlMessage {
  std::string cmd;
};

// Encoding is compact JSON with a fixed key order, so equal messages encode
// to equal bytes. Decoding ignores unknown keys and throws TransportError on
// a missing or mistyped field, a wrong "type", or a schema_version newer than
// kSchemaVersion.
std::string encode(const WireMeasurement& m);
std::string encode(const WireLoadUpdate& m);
std::string encode(const ControlMessage& m);

WireMeasurement decode_measurement(std::string_view payload);
WireLoadUpdate decode_load_update(std::string_view payload);
ControlMessage decode_control(std::string_view payload);

}  // namespace tdcosim::coupling
