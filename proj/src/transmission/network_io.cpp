#include "tdcosim/transmission/network_io.hpp"

#include <fstream>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::tx {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json signal_to_json(const SignalProgram& p) {
  switch (p.kind) {
    case SignalProgram::Kind::Constant:
      return {{"kind", "constant"}, {"base", p.base}};
    case SignalProgram::Kind::Step:
      return {{"kind", "step"}, {"base", p.base}, {"delta", p.step_delta}, {"at_s", ticks_to_seconds(p.step_time)}};
    case SignalProgram::Kind::Ramp:
      return {{"kind", "ramp"},
              {"base", p.base},
              {"rate_per_s", p.ramp_rate_per_s},
              {"start_s", ticks_to_seconds(p.ramp_start)},
              {"end_s", ticks_to_seconds(p.ramp_end)}};
    case SignalProgram::Kind::Sine:
      return {{"kind", "sine"},
              {"base", p.base},
              {"amplitude", p.amplitude},
              {"freq_hz", p.freq_hz},
              {"phase_rad", p.phase_rad}};
  }
  return {};
}

SignalProgram signal_from_json(const json& j) {
  const auto kind = required<std::string>(j, "kind");
  const auto base = required<double>(j, "base");
  SignalProgram p;
  if (kind == "constant") {
    p = SignalProgram::constant(base);
  } else if (kind == "step") {
    p = SignalProgram::step(base, required<double>(j, "delta"), seconds_to_ticks(required<double>(j, "at_s")));
  } else if (kind == "ramp") {
    p = SignalProgram::ramp(base, required<double>(j, "rate_per_s"), seconds_to_ticks(required<double>(j, "start_s")),
                            seconds_to_ticks(required<double>(j, "end_s")));
  } else if (kind == "sine") {
    p = SignalProgram::sine(base, required<double>(j, "amplitude"), required<double>(j, "freq_hz"),
                            j.value("phase_rad", 0.0));
  } else {
    throw ConfigError("unknown signal kind '" + kind + "'");
  }
  p.validate();
  return p;
}

json reference_to_json(const ReferenceProgram& program) {
  return {{"voltage", signal_to_json(program.voltage)}, {"frequency", signal_to_json(program.frequency)}};
}

ReferenceProgram reference_from_json(const json& j) {
  ReferenceProgram r;
  if (j.contains("voltage")) r.voltage = signal_from_json(j.at("voltage"));
  if (j.contains("frequency")) r.frequency = signal_from_json(j.at("frequency"));
  return r;
}

json network_to_json(const TxNetwork& network) {
  json buses = json::array();
  for (const auto& b : network.buses()) buses.push_back({{"id", b.id}, {"kv", b.nominal_kv}});
  json lines = json::array();
  for (const auto& l : network.lines()) {
    lines.push_back({{"from", l.from_bus}, {"to", l.to_bus}, {"r_pu", l.r_pu}, {"x_pu", l.x_pu}, {"b_pu", l.b_shunt_pu}});
  }
  json loads = json::array();
  for (std::size_t i = 0; i < network.buses().size(); ++i) {
    const auto& s = network.spot_loads()[i];
    if (s.p_pu != 0.0 || s.q_pu != 0.0) {
      loads.push_back({{"bus", network.buses()[i].id}, {"p_pu", s.p_pu}, {"q_pu", s.q_pu}});
    }
  }
  return {{"schema", kTxNetworkSchema},
          {"base_mva", network.base_mva()},
          {"source_bus", network.source_bus()},
          {"buses", buses},
          {"lines", lines},
          {"spot_loads", loads},
          {"reference", reference_to_json(network.program())}};
}

TxNetwork network_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("transmission network must be a JSON object");
  if (j.contains("schema") && j.at("schema") != kTxNetworkSchema) {
    throw ConfigError("unsupported transmission schema " + j.at("schema").dump());
  }
  std::vector<Bus> buses;
  for (const auto& b : required<json>(j, "buses")) buses.push_back({required<std::string>(b, "id"), b.value("kv", 0.0)});
  std::vector<PiLine> lines;
  for (const auto& l : required<json>(j, "lines")) {
    lines.push_back({required<std::string>(l, "from"), required<std::string>(l, "to"), required<double>(l, "r_pu"),
                     required<double>(l, "x_pu"), l.value("b_pu", 0.0)});
  }
  ReferenceProgram program = j.contains("reference") ? reference_from_json(j.at("reference")) : ReferenceProgram{};
  TxNetwork net(std::move(buses), std::move(lines), required<std::string>(j, "source_bus"), std::move(program),
                required<double>(j, "base_mva"));
  if (j.contains("spot_loads")) {
    for (const auto& s : j.at("spot_loads")) {
      net.set_spot_load(required<std::string>(s, "bus"), required<double>(s, "p_pu"), required<double>(s, "q_pu"));
    }
  }
  return net;
}

TxNetwork load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transmission network file '" + path + "'");
  try {
    return network_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

}  // namespace tdcosim::tx
