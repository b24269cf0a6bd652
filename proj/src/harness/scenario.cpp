#include "tdcosim/harness/scenario.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/distribution/synth.hpp"
#include "tdcosim/transmission/network_io.hpp"

namespace tdcosim::harness {

using nlohmann::json;

namespace {

std::string check_kind_name(CheckSpec::Kind k) {
  switch (k) {
    case CheckSpec::Kind::None: return "none";
    case CheckSpec::Kind::Delay: return "delay";
    case CheckSpec::Kind::Spectral: return "spectral";
    case CheckSpec::Kind::DerEvents: return "der_events";
    case CheckSpec::Kind::Soak: return "soak";
  }
  return "none";
}

CheckSpec::Kind check_kind_from(const std::string& s) {
  if (s == "none") return CheckSpec::Kind::None;
  if (s == "delay") return CheckSpec::Kind::Delay;
  if (s == "spectral") return CheckSpec::Kind::Spectral;
  if (s == "der_events") return CheckSpec::Kind::DerEvents;
  if (s == "soak") return CheckSpec::Kind::Soak;
  throw ConfigError("unknown check kind '" + s + "'");
}

tx::SignalProgram shifted(tx::SignalProgram s, Ticks offset) {
  if (s.kind == tx::SignalProgram::Kind::Step) {
    s.step_time += offset;
    if (s.step_time < 0) throw ConfigError("step_phase_offset_s moves a step before t=0");
  }
  return s;
}

}  // namespace

Ticks ScenarioSpec::duration_ticks() const { return seconds_to_ticks(duration_s); }

tx::ReferenceProgram ScenarioSpec::effective_reference() const {
  const Ticks offset = step_phase_offset_s < 0 ? -seconds_to_ticks(-step_phase_offset_s)
                                               : seconds_to_ticks(step_phase_offset_s);
  return {shifted(reference.voltage, offset), shifted(reference.frequency, offset)};
}

void ScenarioSpec::validate() const {
  if (name.empty()) throw ConfigError("scenario needs a name");
  config.validate();
  ticks_per_cosim_step(config);
  const Ticks d = duration_ticks();
  if (d <= 0 || d % config.dt_tx != 0) throw ConfigError("duration_s must be a positive multiple of dt_tx");
  if (!(reply_timeout_s > 0.0)) throw ConfigError("reply_timeout_s must be positive");
  const auto ref = effective_reference();
  for (const auto* s : {&ref.voltage, &ref.frequency}) {
    s->validate();
    if (s->kind == tx::SignalProgram::Kind::Step) {
      if (s->step_time % config.dt_tx != 0) throw ConfigError("shifted step time is not on the dt_tx grid");
      if (s->step_time > d) throw ConfigError("step time lies beyond the run duration");
    }
  }
  for (const auto& e : der_events) {
    if (seconds_to_ticks(e.at_s) > d) throw ConfigError("DER event beyond the run duration");
  }
  if (!synthetic && !inline_feeder) throw ConfigError("scenario needs a feeder");
  if (check.kind == CheckSpec::Kind::Spectral && !(check.f_hz > 0.0)) {
    throw ConfigError("spectral check needs f_hz > 0");
  }
  network();
}

tx::TxNetwork ScenarioSpec::network() const {
  return tx::TxNetwork::two_bus(line, effective_reference(), config.base_mva_tx);
}

der::FeederModel ScenarioSpec::feeder_model() const {
  if (!synthetic) return *inline_feeder;
  const auto& s = *synthetic;
  dist::FeederSynthesisOptions o;
  o.base_mva = config.base_mva_feeder;
  o.z_frac = s.z_frac;
  o.i_frac = s.i_frac;
  o.p_frac = s.p_frac;
  o.path_r_pu = s.path_r_pu;
  o.feeder_id = "feeder";
  const double fraction = s.n_nodes == 0 ? 0.0 : static_cast<double>(s.n_ders) / static_cast<double>(s.n_nodes);
  der::FeederModel m{dist::synthesize_feeder(s.n_nodes, s.total_p_mw, s.total_q_mvar, s.seed, fraction, o), {}};
  for (const auto& node : m.feeder.der_nodes()) {
    der::DerUnit d;
    d.id = "der-" + node;
    d.node = node;
    d.s_rated_mva = s.der_s_rated_mva;
    d.p_available_pu = s.der_p_available_pu;
    d.gsf_mode = s.der_mode;
    d.validate();
    m.ders.push_back(d);
  }
  return m;
}

std::string ScenarioSpec::run_id() const {
  std::string id;
  for (char c : name) id += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return id;
}

json scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["duration_s"] = s.duration_s;
  j["cosim"] = {{"dt_tx_s", s.config.dt_tx_seconds()},
                {"dt_cosim_s", s.config.dt_cosim_seconds()},
                {"pacing", std::string(to_string(s.config.pacing_mode))},
                {"max_der_pf_iterations", s.config.max_der_pf_iterations},
                {"pf_tolerance", s.config.pf_tolerance},
                {"base_mva_tx", s.config.base_mva_tx},
                {"base_mva_feeder", s.config.base_mva_feeder},
                {"stale_policy", std::string(coupling::to_string(s.stale_policy))},
                {"reply_timeout_s", s.reply_timeout_s}};
  j["transmission"] = {{"line", {{"r_pu", s.line.r_pu}, {"x_pu", s.line.x_pu}, {"b_pu", s.line.b_shunt_pu}}},
                       {"reference", tx::reference_to_json(s.reference)}};
  j["step_phase_offset_s"] = s.step_phase_offset_s;
  if (s.synthetic) {
    const auto& f = *s.synthetic;
    j["feeder"] = {{"synthetic",
                    {{"n_nodes", f.n_nodes},
                     {"total_p_mw", f.total_p_mw},
                     {"total_q_mvar", f.total_q_mvar},
                     {"seed", f.seed},
                     {"n_ders", f.n_ders},
                     {"zip", {f.z_frac, f.i_frac, f.p_frac}},
                     {"path_r_pu", f.path_r_pu},
                     {"der", {{"s_rated_mva", f.der_s_rated_mva},
                              {"p_available_pu", f.der_p_available_pu},
                              {"gsf_mode", std::string(der::to_string(f.der_mode))}}}}}};
  } else {
    j["feeder"] = {{"model", der::feeder_model_to_json(*s.inline_feeder)}};
  }
  j["der_events"] = json::array();
  for (const auto& e : s.der_events) j["der_events"].push_back(coupling::der_event_to_json(e));
  j["transport"] = {{"kind", s.transport.kind == TransportSpec::Kind::Mqtt ? "mqtt" : "loopback"},
                    {"dx_process", s.transport.dx_process}};
  if (!s.transport.host.empty()) j["transport"]["host"] = s.transport.host;
  if (s.transport.port != 0) j["transport"]["port"] = s.transport.port;
  j["check"] = {{"kind", check_kind_name(s.check.kind)}};
  if (s.check.kind == CheckSpec::Kind::Spectral) {
    j["check"]["f_hz"] = s.check.f_hz;
    j["check"]["expect"] = s.check.expect_propagation ? "propagates" : "fails";
  }
  if (s.check.kind == CheckSpec::Kind::Delay || s.check.kind == CheckSpec::Kind::Spectral) {
    j["check"]["signal"] = s.check.signal;
  }
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s;
  try {
    if (j.value("schema", std::string(kScenarioSchema)) != kScenarioSchema) {
      throw ConfigError("unsupported scenario schema '" + j.at("schema").get<std::string>() + "'");
    }
    s.name = j.at("name").get<std::string>();
    s.description = j.value("description", std::string());
    s.duration_s = j.at("duration_s").get<double>();
    if (j.contains("cosim")) {
      const auto& c = j.at("cosim");
      s.config = make_config(c.value("dt_tx_s", 0.005), c.value("dt_cosim_s", 1.0));
      s.config.pacing_mode = pacing_mode_from_string(c.value("pacing", std::string("logical")));
      s.config.max_der_pf_iterations = c.value("max_der_pf_iterations", s.config.max_der_pf_iterations);
      s.config.pf_tolerance = c.value("pf_tolerance", s.config.pf_tolerance);
      s.config.base_mva_tx = c.value("base_mva_tx", s.config.base_mva_tx);
      s.config.base_mva_feeder = c.value("base_mva_feeder", s.config.base_mva_feeder);
      s.stale_policy = coupling::stale_policy_from_string(c.value("stale_policy", std::string("hold_last")));
      s.reply_timeout_s = c.value("reply_timeout_s", s.reply_timeout_s);
    }
    if (j.contains("transmission")) {
      const auto& t = j.at("transmission");
      if (t.contains("line")) {
        const auto& l = t.at("line");
        s.line.r_pu = l.at("r_pu").get<double>();
        s.line.x_pu = l.at("x_pu").get<double>();
        s.line.b_shunt_pu = l.value("b_pu", 0.0);
      }
      if (t.contains("reference")) s.reference = tx::reference_from_json(t.at("reference"));
    }
    s.step_phase_offset_s = j.value("step_phase_offset_s", 0.0);
    const auto& f = j.at("feeder");
    if (f.contains("synthetic")) {
      const auto& y = f.at("synthetic");
      SyntheticFeederSpec sf;
      sf.n_nodes = y.at("n_nodes").get<std::size_t>();
      sf.total_p_mw = y.at("total_p_mw").get<double>();
      sf.total_q_mvar = y.at("total_q_mvar").get<double>();
      sf.seed = y.value("seed", sf.seed);
      sf.n_ders = y.value("n_ders", sf.n_ders);
      if (y.contains("zip")) {
        const auto zip = y.at("zip").get<std::vector<double>>();
        if (zip.size() != 3) throw ConfigError("zip must list [z, i, p] fractions");
        sf.z_frac = zip[0];
        sf.i_frac = zip[1];
        sf.p_frac = zip[2];
      }
      sf.path_r_pu = y.value("path_r_pu", sf.path_r_pu);
      if (y.contains("der")) {
        const auto& d = y.at("der");
        sf.der_s_rated_mva = d.value("s_rated_mva", sf.der_s_rated_mva);
        sf.der_p_available_pu = d.value("p_available_pu", sf.der_p_available_pu);
        sf.der_mode = der::gsf_mode_from_string(d.value("gsf_mode", std::string("constant_pq")));
      }
      s.synthetic = sf;
    } else if (f.contains("model")) {
      s.inline_feeder = der::feeder_model_from_json(f.at("model"));
    } else if (f.contains("file")) {
      s.inline_feeder = der::load_feeder_model_file(f.at("file").get<std::string>());
    } else {
      throw ConfigError("feeder needs one of 'synthetic', 'model' or 'file'");
    }
    if (j.contains("der_events")) {
      for (const auto& e : j.at("der_events")) s.der_events.push_back(coupling::der_event_from_json(e));
    }
    if (j.contains("transport")) {
      const auto& t = j.at("transport");
      const auto kind = t.value("kind", std::string("loopback"));
      if (kind == "mqtt") {
        s.transport.kind = TransportSpec::Kind::Mqtt;
      } else if (kind != "loopback") {
        throw ConfigError("unknown transport kind '" + kind + "'");
      }
      s.transport.host = t.value("host", std::string());
      s.transport.port = t.value("port", std::uint16_t{0});
      s.transport.dx_process = t.value("dx_process", false);
    }
    if (j.contains("check")) {
      const auto& c = j.at("check");
      s.check.kind = check_kind_from(c.value("kind", std::string("none")));
      s.check.signal = c.value("signal", s.check.signal);
      s.check.f_hz = c.value("f_hz", 0.0);
      const auto expect = c.value("expect", std::string("propagates"));
      if (expect != "propagates" && expect != "fails") throw ConfigError("check.expect must be propagates or fails");
      s.check.expect_propagation = expect == "propagates";
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario document: ") + e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file not found: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::vector<std::string> builtin_scenario_names() {
  return {"s1", "s2", "s3", "s4", "delay-soak", "der-events"};
}

namespace {

ScenarioSpec step_scenario(std::string name, double offset_s, std::string description) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.duration_s = 10.0;
  s.config = make_config(0.005, 1.0);
  s.reference.voltage = tx::SignalProgram::step(1.0, -0.05, seconds_to_ticks(5.0));
  s.step_phase_offset_s = offset_s;
  s.synthetic = SyntheticFeederSpec{};
  s.synthetic->seed = 11;
  s.check.kind = CheckSpec::Kind::Delay;
  return s;
}

ScenarioSpec sine_scenario(std::string name, double f_hz, double duration_s, bool propagates,
                           std::string description) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.duration_s = duration_s;
  s.config = make_config(0.005, 1.0);
  s.reference.voltage = tx::SignalProgram::sine(1.0, 0.1, f_hz);
  s.synthetic = SyntheticFeederSpec{};
  s.synthetic->seed = 11;
  s.check.kind = CheckSpec::Kind::Spectral;
  s.check.f_hz = f_hz;
  s.check.expect_propagation = propagates;
  return s;
}

}  // namespace

ScenarioSpec builtin_scenario(const std::string& name) {
  if (name == "s1") {
    return step_scenario("s1", 0.0, "0.05 pu source voltage step aligned with a co-simulation boundary");
  }
  if (name == "s2") {
    return step_scenario("s2", -0.1, "0.05 pu source voltage step 0.1 s before a co-simulation boundary");
  }
  if (name == "s3") {
    return sine_scenario("s3", 0.25, 24.0, true, "0.1 pu source voltage modulation at 0.25 Hz");
  }
  if (name == "s4") return sine_scenario("s4", 1.0, 10.0, false, "0.1 pu source voltage modulation at 1 Hz");
  if (name == "delay-soak") {
    ScenarioSpec s;
    s.name = name;
    s.description = "real-time closed-loop delay soak on a 1000-node feeder with 100 DERs";
    s.duration_s = 60.0;
    s.config = make_config(0.005, 1.0);
    s.config.pacing_mode = PacingMode::RealTime;
    SyntheticFeederSpec f;
    f.n_nodes = 1000;
    f.total_p_mw = 10.0;
    f.total_q_mvar = 3.0;
    f.seed = 7;
    f.n_ders = 100;
    f.der_s_rated_mva = 0.05;
    f.der_p_available_pu = 0.8;
    f.der_mode = der::GsfMode::VoltVarPlusFreqWatt;
    s.synthetic = f;
    s.check.kind = CheckSpec::Kind::Soak;
    return s;
  }
  if (name == "der-events") {
    ScenarioSpec s;
    s.name = name;
    s.description = "a 2 MW DER fleet disconnects at 13 s and reconnects at 27 s";
    s.duration_s = 40.0;
    s.config = make_config(0.005, 1.0);
    SyntheticFeederSpec f;
    f.seed = 5;
    f.n_ders = 10;
    f.z_frac = 0.0;
    f.i_frac = 0.0;
    f.p_frac = 1.0;
    f.der_s_rated_mva = 0.2;
    f.der_p_available_pu = 1.0;
    f.der_mode = der::GsfMode::ConstantPQ;
    s.synthetic = f;
    s.der_events = {{13.0, false, {}}, {27.0, true, {}}};
    s.check.kind = CheckSpec::Kind::DerEvents;
    return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
  for (const auto& n : builtin_scenario_names()) {
    if (n == name_or_path) return builtin_scenario(n);
  }
  if (std::filesystem::exists(name_or_path)) return load_scenario_file(name_or_path);
  throw ConfigError("unknown scenario '" + name_or_path + "' (not a built-in and no such file)");
}

}  // namespace tdcosim::harness
