#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tdcosim/core/config.hpp"
#include "tdcosim/coupling/dx_model.hpp"
#include "tdcosim/coupling/sequencer.hpp"
#include "tdcosim/der/fleet_io.hpp"
#include "tdcosim/transmission/network.hpp"

namespace tdcosim::harness {

inline constexpr const char* kScenarioSchema = "tdcosim.scenario/1";

struct SyntheticFeederSpec {
  std::size_t n_nodes = 30;
  double total_p_mw = 10.0;
  double total_q_mvar = 3.0;
  std::uint64_t seed = 1;
  std::size_t n_ders = 0;
  double z_frac = 0.4;
  double i_frac = 0.3;
  double p_frac = 0.3;
  double path_r_pu = 0.02;
  // Every synthesized DER gets this rating and grid-support setting.
  double der_s_rated_mva = 0.2;
  double der_p_available_pu = 1.0;
  der::GsfMode der_mode = der::GsfMode::ConstantPQ;
};

/// What scenario assertions the CLI evaluates.
struct CheckSpec {
  enum class Kind { None, Delay, Spectral, DerEvents, Soak };
  Kind kind = Kind::None;
  std::string signal = "p_dx";
  double f_hz = 0.0;          // Spectral
  bool expect_propagation = true;  // Spectral
};

struct TransportSpec {
  enum class Kind { Loopback, Mqtt };
  Kind kind = Kind::Loopback;
  std::string host;  // empty: environment or 127.0.0.1
  std::uint16_t port = 0;
  bool dx_process = false;  // run the distribution endpoint as a child process
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  double duration_s = 10.0;
  CosimConfig config;
  coupling::StalePolicy stale_policy = coupling::StalePolicy::HoldLast;
  double reply_timeout_s = 10.0;

  tx::PiLine line{"src", "pcc", 0.01, 0.1, 0.02};
  tx::ReferenceProgram reference;
  /// Shifts every step in the reference program; scenario 2 uses -0.1 s.
  double step_phase_offset_s = 0.0;

  std::optional<SyntheticFeederSpec> synthetic;
  std::optional<der::FeederModel> inline_feeder;  // used when synthetic is empty
  std::vector<coupling::DerEvent> der_events;

  TransportSpec transport;
  CheckSpec check;

  /// Throws ConfigError: duration not a whole number of ticks, events after
  /// the end, shifted steps off the tick grid, and so on.
  void validate() const;

  Ticks duration_ticks() const;
  /// Reference program with step_phase_offset_s applied.
  tx::ReferenceProgram effective_reference() const;
  tx::TxNetwork network() const;
  der::FeederModel feeder_model() const;
  std::string run_id() const;
};

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);
ScenarioSpec load_scenario_file(const std::string& path);

/// Built-ins: s1, s2, s3, s4, delay-soak, der-events.
std::vector<std::string> builtin_scenario_names();
ScenarioSpec builtin_scenario(const std::string& name);

/// Built-in name or path to a scenario file.
ScenarioSpec resolve_scenario(const std::string& name_or_path);

}  // namespace tdcosim::harness
