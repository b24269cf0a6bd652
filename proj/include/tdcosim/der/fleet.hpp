#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "tdcosim/core/config.hpp"
#include "tdcosim/core/sim_time.hpp"
#include "tdcosim/der/gsf.hpp"
#include "tdcosim/distribution/feeder.hpp"
#include "tdcosim/distribution/sweep.hpp"

namespace tdcosim::der {

struct DerUnit {
  std::string id;
  std::string node;
  double s_rated_mva = 0.0;
  double p_available_pu = 0.0;  // of rating
  GsfMode gsf_mode = GsfMode::ConstantPQ;
  VoltVarCurve volt_var;
  FreqWattParams freq_watt;
  bool connected = true;

  void validate() const;
};

struct DerOutput {
  double p_pu = 0.0;  // of rating
  double q_pu = 0.0;

  friend bool operator==(const DerOutput&, const DerOutput&) = default;
};

/// Per-DER outputs (parallel to the fleet vector) and their aggregate
/// injection per feeder node in p.u. on the feeder base.
struct DerOutputs {
  std::vector<DerOutput> per_der;
  std::vector<std::complex<double>> per_node;

  std::complex<double> total_injection_pu() const;
};

/// Zero output for every DER, sized for `feeder`.
DerOutputs zero_outputs(std::size_t n_ders, const dist::Feeder& feeder);

/// Evaluates each DER's grid-support function at its POI voltage from `pf`.
/// Throws ConfigError when a DER node is absent from the feeder.
DerOutputs der_outputs(const std::vector<DerUnit>& ders, const dist::Feeder& feeder, const dist::PfSolution& pf,
                       double freq_hz);

/// Largest per-DER change in p or q between two output sets.
double max_output_change(const DerOutputs& a, const DerOutputs& b);

struct DerPfOptions {
  double tolerance_pu = 1e-8;   // on DER output change, p.u. of rating
  int max_rounds = 20;
  double sweep_tolerance_pu = 1e-8;
  int sweep_max_iterations = 100;

  static DerPfOptions from_config(const CosimConfig& config);
};

struct DerPfResult {
  dist::PfSolution pf;
  DerOutputs outputs;  // the injections `pf` was solved with
  int iterations = 0;  // power flows run, including the first
  bool converged = false;
  double last_change_pu = 0.0;
};

/// Alternates power flow and DER output evaluation, starting from zero DER
/// output, until no DER output moves by more than the tolerance between
/// rounds (and the sweep itself converged) or the round cap is hit.
DerPfResult converge_der_pf(const dist::Feeder& feeder, const std::vector<DerUnit>& ders, std::complex<double> head_v,
                            double freq_hz, const DerPfOptions& options);

/// Fleet plus pending connect/disconnect events. Events fire at the first
/// apply_due() whose timestamp is at or after the event time.
class DerRegistry {
 public:
  DerRegistry() = default;
  explicit DerRegistry(std::vector<DerUnit> ders);

  const std::vector<DerUnit>& ders() const { return ders_; }

  /// Schedules a connection change. Throws ConfigError for unknown ids.
  void set_connected(const std::vector<std::string>& ids, bool connected, SimTime at);
  void set_connected_all(bool connected, SimTime at);

  /// Applies every event due at `now`; returns how many fired.
  std::size_t apply_due(SimTime now);
  std::size_t pending_events() const { return events_.size(); }

 private:
  struct Event {
    std::vector<std::size_t> targets;
    bool connected;
    Ticks at;
  };

  std::size_t index_of(const std::string& id) const;

  std::vector<DerUnit> ders_;
  std::vector<Event> events_;
};

}  // namespace tdcosim::der
