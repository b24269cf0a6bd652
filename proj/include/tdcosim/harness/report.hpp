#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "tdcosim/core/events.hpp"
#include "tdcosim/coupling/dx_model.hpp"
#include "tdcosim/der/fleet_io.hpp"

namespace tdcosim::harness {

enum class RunMode { Cosim, MonolithicTx, MonolithicDx };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

/// Signals of one run on the dt_tx grid, index 0 at t = 0.
struct RunReport {
  RunMode mode = RunMode::Cosim;
  std::string scenario;
  double dt_tx_s = 0.005;
  double dt_cosim_s = 1.0;

  std::vector<double> t_s;
  std::vector<double> v_pcc;  // pu
  std::vector<double> p_dx;   // MW drawn at the feeder head
  std::vector<double> q_dx;   // MVAr
  std::vector<double> freq;   // Hz

  std::vector<std::string> der_ids;
  std::vector<der::DerStepRecord> der_outputs;  // one record per co-sim step
  std::vector<coupling::DerEvent> der_events;

  std::vector<double> delay_s;
  std::vector<std::int64_t> delay_step;
  std::vector<OverrunEvent> overruns;
  std::map<std::string, std::uint64_t> counters;

  nlohmann::json config;
  bool complete = true;
  std::string abort_reason;

  /// Named series: v_pcc, p_dx, q_dx, freq. Throws MetricError otherwise.
  const std::vector<double>& signal(std::string_view name) const;
  std::size_t overruns_of(OverrunKind kind) const;
  /// Throws MetricError when series lengths differ or a value is not finite.
  void check_integrity() const;
};

nlohmann::json report_to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

}  // namespace tdcosim::harness
