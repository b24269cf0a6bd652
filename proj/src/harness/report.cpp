#include "tdcosim/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::harness {

using nlohmann::json;

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Cosim: return "cosim";
    case RunMode::MonolithicTx: return "monolithic_tx";
    case RunMode::MonolithicDx: return "monolithic_dx";
  }
  return "cosim";
}

RunMode run_mode_from_string(std::string_view name) {
  if (name == "cosim") return RunMode::Cosim;
  if (name == "monolithic_tx") return RunMode::MonolithicTx;
  if (name == "monolithic_dx") return RunMode::MonolithicDx;
  throw ConfigError("unknown run mode '" + std::string(name) + "'");
}

const std::vector<double>& RunReport::signal(std::string_view name) const {
  if (name == "v_pcc") return v_pcc;
  if (name == "p_dx") return p_dx;
  if (name == "q_dx") return q_dx;
  if (name == "freq") return freq;
  throw MetricError("unknown signal '" + std::string(name) + "'");
}

std::size_t RunReport::overruns_of(OverrunKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(overruns.begin(), overruns.end(), [&](const OverrunEvent& e) { return e.kind == kind; }));
}

void RunReport::check_integrity() const {
  const auto n = t_s.size();
  for (const auto* name : {"v_pcc", "p_dx", "q_dx", "freq"}) {
    const auto& s = signal(name);
    if (s.size() != n) throw MetricError(std::string("series '") + name + "' has a different length than t_s");
    for (double x : s) {
      if (!std::isfinite(x)) throw MetricError(std::string("series '") + name + "' contains a non-finite value");
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(t_s[i] - t_s[i - 1] - dt_tx_s) > 1e-9) throw MetricError("time axis has a gap");
  }
}

json report_to_json(const RunReport& r) {
  json j;
  j["schema"] = "tdcosim.run_report/1";
  j["mode"] = std::string(to_string(r.mode));
  j["scenario"] = r.scenario;
  j["dt_tx_s"] = r.dt_tx_s;
  j["dt_cosim_s"] = r.dt_cosim_s;
  j["complete"] = r.complete;
  if (!r.abort_reason.empty()) j["abort_reason"] = r.abort_reason;
  j["signals"] = {{"t_s", r.t_s}, {"v_pcc", r.v_pcc}, {"p_dx", r.p_dx}, {"q_dx", r.q_dx}, {"freq", r.freq}};
  j["der_ids"] = r.der_ids;
  json outs = json::array();
  for (const auto& rec : r.der_outputs) {
    json o{{"step_index", rec.step_index}, {"t_s", rec.t_s}, {"p_pu", json::array()}, {"q_pu", json::array()}};
    for (const auto& d : rec.outputs) {
      o["p_pu"].push_back(d.p_pu);
      o["q_pu"].push_back(d.q_pu);
    }
    outs.push_back(std::move(o));
  }
  j["der_outputs"] = std::move(outs);
  j["der_events"] = json::array();
  for (const auto& e : r.der_events) j["der_events"].push_back(coupling::der_event_to_json(e));
  j["delays"] = {{"step_index", r.delay_step}, {"delay_s", r.delay_s}};
  j["overruns"] = json::array();
  for (const auto& o : r.overruns) {
    j["overruns"].push_back(
        {{"kind", std::string(to_string(o.kind))}, {"step_index", o.step_index}, {"measured", std::isfinite(o.measured) ? json(o.measured) : json(nullptr)},
         {"budget", o.budget}});
  }
  j["counters"] = r.counters;
  j["config"] = r.config;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    if (j.value("schema", std::string()) != "tdcosim.run_report/1") throw ConfigError("not a run report");
    r.mode = run_mode_from_string(j.at("mode").get<std::string>());
    r.scenario = j.at("scenario").get<std::string>();
    r.dt_tx_s = j.at("dt_tx_s").get<double>();
    r.dt_cosim_s = j.at("dt_cosim_s").get<double>();
    r.complete = j.at("complete").get<bool>();
    r.abort_reason = j.value("abort_reason", std::string());
    const auto& s = j.at("signals");
    r.t_s = s.at("t_s").get<std::vector<double>>();
    r.v_pcc = s.at("v_pcc").get<std::vector<double>>();
    r.p_dx = s.at("p_dx").get<std::vector<double>>();
    r.q_dx = s.at("q_dx").get<std::vector<double>>();
    r.freq = s.at("freq").get<std::vector<double>>();
    r.der_ids = j.value("der_ids", std::vector<std::string>{});
    for (const auto& o : j.value("der_outputs", json::array())) {
      der::DerStepRecord rec;
      rec.step_index = o.at("step_index").get<std::int64_t>();
      rec.t_s = o.at("t_s").get<double>();
      const auto p = o.at("p_pu").get<std::vector<double>>();
      const auto q = o.at("q_pu").get<std::vector<double>>();
      for (std::size_t i = 0; i < p.size() && i < q.size(); ++i) rec.outputs.push_back({p[i], q[i]});
      r.der_outputs.push_back(std::move(rec));
    }
    for (const auto& e : j.value("der_events", json::array())) r.der_events.push_back(coupling::der_event_from_json(e));
    if (j.contains("delays")) {
      r.delay_step = j.at("delays").at("step_index").get<std::vector<std::int64_t>>();
      r.delay_s = j.at("delays").at("delay_s").get<std::vector<double>>();
    }
    for (const auto& o : j.value("overruns", json::array())) {
      const auto kind = o.at("kind").get<std::string>();
      OverrunEvent e;
      e.kind = kind == "tx_step" ? OverrunKind::TxStep
               : kind == "cosim_loop" ? OverrunKind::CosimLoop
                                      : OverrunKind::DerPfIterationCap;
      e.step_index = o.at("step_index").get<std::int64_t>();
      e.measured = o.at("measured").is_null() ? std::numeric_limits<double>::infinity()
                                               : o.at("measured").get<double>();
      e.budget = o.at("budget").get<double>();
      r.overruns.push_back(e);
    }
    r.counters = j.value("counters", std::map<std::string, std::uint64_t>{});
    r.config = j.value("config", json::object());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run report: ") + e.what());
  }
  return r;
}

}  // namespace tdcosim::harness
