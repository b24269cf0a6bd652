#include "tdcosim/der/fleet_io.hpp"

#include <fstream>
#include <iomanip>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/distribution/feeder_io.hpp"

namespace tdcosim::der {

using nlohmann::json;

json der_to_json(const DerUnit& d) {
  return {{"id", d.id},
          {"node", d.node},
          {"s_rated_mva", d.s_rated_mva},
          {"p_available_pu", d.p_available_pu},
          {"gsf_mode", std::string(to_string(d.gsf_mode))},
          {"connected", d.connected},
          {"volt_var",
           {{"v1", d.volt_var.v1},
            {"v2", d.volt_var.v2},
            {"v3", d.volt_var.v3},
            {"v4", d.volt_var.v4},
            {"q1", d.volt_var.q1},
            {"q4", d.volt_var.q4}}},
          {"freq_watt",
           {{"deadband_hz", d.freq_watt.deadband_hz},
            {"droop_pu", d.freq_watt.droop_pu},
            {"f_nominal_hz", d.freq_watt.f_nominal_hz}}}};
}

DerUnit der_from_json(const json& j) {
  try {
    DerUnit d;
    d.id = j.at("id").get<std::string>();
    d.node = j.at("node").get<std::string>();
    d.s_rated_mva = j.at("s_rated_mva").get<double>();
    d.p_available_pu = j.value("p_available_pu", 0.0);
    d.gsf_mode = gsf_mode_from_string(j.value("gsf_mode", std::string("constant_pq")));
    d.connected = j.value("connected", true);
    if (j.contains("volt_var")) {
      const auto& v = j.at("volt_var");
      d.volt_var = {v.value("v1", 0.92), v.value("v2", 0.98), v.value("v3", 1.02),
                    v.value("v4", 1.08), v.value("q1", 0.44), v.value("q4", -0.44)};
    }
    if (j.contains("freq_watt")) {
      const auto& f = j.at("freq_watt");
      d.freq_watt = {f.value("deadband_hz", 0.036), f.value("droop_pu", 0.05), f.value("f_nominal_hz", 60.0)};
    }
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid DER JSON: ") + e.what());
  }
}

json feeder_model_to_json(const FeederModel& model) {
  json j = dist::feeder_to_json(model.feeder);
  json ders = json::array();
  for (const auto& d : model.ders) ders.push_back(der_to_json(d));
  j["ders"] = std::move(ders);
  return j;
}

FeederModel feeder_model_from_json(const json& j) {
  dist::Feeder feeder = dist::feeder_from_json(j);
  std::vector<DerUnit> ders;
  if (j.contains("ders")) {
    for (const auto& d : j.at("ders")) {
      ders.push_back(der_from_json(d));
      if (!feeder.has_node(ders.back().node)) {
        throw ConfigError("DER " + ders.back().id + " attached to unknown node '" + ders.back().node + "'");
      }
    }
  }
  return {std::move(feeder), std::move(ders)};
}

FeederModel load_feeder_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open feeder file '" + path + "'");
  try {
    return feeder_model_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

void write_der_csv(std::ostream& out, const std::vector<DerUnit>& ders, const std::vector<DerStepRecord>& records) {
  out << "step_index,t_s,der_id,p_pu,q_pu\n" << std::setprecision(12);
  for (const auto& r : records) {
    for (std::size_t k = 0; k < ders.size() && k < r.outputs.size(); ++k) {
      out << r.step_index << ',' << r.t_s << ',' << ders[k].id << ',' << r.outputs[k].p_pu << ',' << r.outputs[k].q_pu
          << '\n';
    }
  }
}

}  // namespace tdcosim::der
