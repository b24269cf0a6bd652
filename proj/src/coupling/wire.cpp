#include "tdcosim/coupling/wire.hpp"

#include <nlohmann/json.hpp>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::coupling {

using nlohmann::ordered_json;

namespace {

ordered_json header(const char* type, std::uint64_t seq, const std::string& run_id, const SimTime& t) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["type"] = type;
  j["run_id"] = run_id;
  j["seq"] = seq;
  j["timestamp_ticks"] = t.ticks();
  j["tick_size_us"] = kTickSizeUs;
  j["step_index"] = t.step_index();
  return j;
}

ordered_json parse(std::string_view payload, const char* type) {
  ordered_json j;
  try {
    j = ordered_json::parse(payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("malformed wire payload: ") + e.what());
  }
  if (!j.is_object()) throw TransportError("wire payload is not a JSON object");
  const auto version = j.value("schema_version", -1);
  if (version < 1 || version > kSchemaVersion) {
    throw TransportError("unsupported schema_version " + std::to_string(version));
  }
  if (j.value("type", std::string()) != type) {
    throw TransportError(std::string("expected a '") + type + "' message");
  }
  return j;
}

template <typename T>
T field(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw TransportError(std::string("wire message lacks '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError(std::string("wire field '") + key + "' has the wrong type");
  }
}

SimTime read_time(const ordered_json& j) {
  const auto ticks = field<std::int64_t>(j, "timestamp_ticks");
  const auto tick_us = field<std::int64_t>(j, "tick_size_us");
  if (tick_us <= 0) throw TransportError("tick_size_us must be positive");
  // Foreign tick sizes are accepted when they convert exactly.
  const std::int64_t us = ticks * tick_us;
  if (us % kTickSizeUs != 0) throw TransportError("timestamp is not representable in local ticks");
  return SimTime::from_ticks(us / kTickSizeUs, field<std::int64_t>(j, "step_index"));
}

}  // namespace

std::string encode(const WireMeasurement& w) {
  const auto& m = w.message;
  auto j = header("measurement", w.seq, w.run_id, m.timestamp);
  j["poi_id"] = m.poi_id;
  j["v_mag_pu"] = m.v_mag_pu;
  j["v_angle_rad"] = m.v_angle_rad;
  j["freq_hz"] = m.freq_hz;
  return j.dump();
}

std::string encode(const WireLoadUpdate& w) {
  const auto& m = w.message;
  auto j = header("load_update", w.seq, w.run_id, m.timestamp);
  j["feeder_id"] = m.feeder_id;
  j["p_mw"] = m.p_mw;
  j["q_mvar"] = m.q_mvar;
  j["converged"] = m.converged;
  j["iterations_used"] = m.iterations_used;
  return j.dump();
}

std::string encode(const ControlMessage& m) {
  ordered_json j;
  j["cmd"] = m.cmd;
  return j.dump();
}

WireMeasurement decode_measurement(std::string_view payload) {
  const auto j = parse(payload, "measurement");
  WireMeasurement w;
  w.seq = field<std::uint64_t>(j, "seq");
  w.run_id = field<std::string>(j, "run_id");
  w.message.timestamp = read_time(j);
  w.message.poi_id = field<std::string>(j, "poi_id");
  w.message.v_mag_pu = field<double>(j, "v_mag_pu");
  w.message.v_angle_rad = field<double>(j, "v_angle_rad");
  w.message.freq_hz = field<double>(j, "freq_hz");
  return w;
}

WireLoadUpdate decode_load_update(std::string_view payload) {
  const auto j = parse(payload, "load_update");
  WireLoadUpdate w;
  w.seq = field<std::uint64_t>(j, "seq");
  w.run_id = field<std::string>(j, "run_id");
  w.message.timestamp = read_time(j);
  w.message.feeder_id = field<std::string>(j, "feeder_id");
  w.message.p_mw = field<double>(j, "p_mw");
  w.message.q_mvar = field<double>(j, "q_mvar");
  w.message.converged = field<bool>(j, "converged");
  w.message.iterations_used = field<int>(j, "iterations_used");
  return w;
}

ControlMessage decode_control(std::string_view payload) {
  ordered_json j;
  try {
    j = ordered_json::parse(payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("malformed control payload: ") + e.what());
  }
  if (!j.is_object()) throw TransportError("control payload is not a JSON object");
  return ControlMessage{field<std::string>(j, "cmd")};
}

}  // namespace tdcosim::coupling
