#include "tdcosim/coupling/dx_model.hpp"

#include <cmath>
#include <limits>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::coupling {

nlohmann::json der_event_to_json(const DerEvent& e) {
  nlohmann::json j;
  j["at_s"] = e.at_s;
  j["connected"] = e.connected;
  if (!e.ids.empty()) j["ders"] = e.ids;
  return j;
}

DerEvent der_event_from_json(const nlohmann::json& j) {
  try {
    DerEvent e;
    e.at_s = j.at("at_s").get<double>();
    e.connected = j.at("connected").get<bool>();
    if (j.contains("ders")) e.ids = j.at("ders").get<std::vector<std::string>>();
    if (!(e.at_s >= 0.0)) throw ConfigError("DER event time must be non-negative");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad DER event: ") + ex.what());
  }
}

DxModel::DxModel(der::FeederModel model, const std::vector<DerEvent>& events, const CosimConfig& config)
    : feeder_(std::move(model.feeder)),
      registry_(std::move(model.ders)),
      config_(config),
      options_(der::DerPfOptions::from_config(config)) {
  config_.validate();
  for (const auto& e : events) {
    const SimTime at = SimTime::from_ticks(seconds_to_ticks(e.at_s), 0);
    if (e.ids.empty()) {
      registry_.set_connected_all(e.connected, at);
    } else {
      registry_.set_connected(e.ids, e.connected, at);
    }
  }
}

DxModel::Result DxModel::solve(SimTime t, double v_mag_pu, double v_angle_rad, double freq_hz) {
  registry_.apply_due(t);
  Result r;
  r.pf = der::converge_der_pf(feeder_, registry_.ders(), std::polar(v_mag_pu, v_angle_rad), freq_hz, options_);
  r.load.timestamp = t;
  r.load.feeder_id = feeder_.id();
  r.load.iterations_used = r.pf.iterations;
  const auto [p, q] = dist::head_power(r.pf.pf, config_.base_mva_feeder);
  const bool finite = std::isfinite(p) && std::isfinite(q);
  r.load.converged = r.pf.converged && finite;
  r.load.p_mw = finite ? p : 0.0;
  r.load.q_mvar = finite ? q : 0.0;
  if (!r.pf.converged) {
    // A diverged sweep can stop with a small output change; report it as
    // unbounded so the event still reads as exceeding its budget.
    const double measured =
        r.pf.last_change_pu > options_.tolerance_pu ? r.pf.last_change_pu : std::numeric_limits<double>::infinity();
    r.overrun = OverrunEvent{OverrunKind::DerPfIterationCap, t.step_index(), measured, options_.tolerance_pu};
  }
  return r;
}

}  // namespace tdcosim::coupling
