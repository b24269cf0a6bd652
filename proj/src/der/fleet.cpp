#include "tdcosim/der/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::der {

void DerUnit::validate() const {
  if (id.empty()) throw ConfigError("DER id must not be empty");
  if (!(s_rated_mva > 0.0)) throw ConfigError("DER " + id + ": s_rated_mva must be > 0");
  if (!(p_available_pu >= 0.0 && p_available_pu <= 1.0)) {
    throw ConfigError("DER " + id + ": p_available_pu must lie in [0, 1]");
  }
  volt_var.validate();
  freq_watt.validate();
}

std::complex<double> DerOutputs::total_injection_pu() const {
  std::complex<double> s(0.0, 0.0);
  for (const auto& v : per_node) s += v;
  return s;
}

DerOutputs zero_outputs(std::size_t n_ders, const dist::Feeder& feeder) {
  DerOutputs out;
  out.per_der.assign(n_ders, DerOutput{});
  out.per_node.assign(feeder.size(), {0.0, 0.0});
  return out;
}

DerOutputs der_outputs(const std::vector<DerUnit>& ders, const dist::Feeder& feeder, const dist::PfSolution& pf,
                       double freq_hz) {
  DerOutputs out = zero_outputs(ders.size(), feeder);
  for (std::size_t k = 0; k < ders.size(); ++k) {
    const auto& d = ders[k];
    if (!feeder.has_node(d.node)) throw ConfigError("DER " + d.id + " attached to unknown node '" + d.node + "'");
    if (!d.connected) continue;
    const auto node = feeder.index_of(d.node);
    DerOutput o;
    switch (d.gsf_mode) {
      case GsfMode::ConstantPQ:
        o.p_pu = d.p_available_pu;
        break;
      case GsfMode::VoltVar:
        o.p_pu = d.p_available_pu;
        o.q_pu = volt_var(std::abs(pf.node_v.at(node)), d.volt_var, o.p_pu);
        break;
      case GsfMode::FreqWatt:
        o.p_pu = freq_watt(freq_hz, d.freq_watt, d.p_available_pu);
        break;
      case GsfMode::VoltVarPlusFreqWatt:
        o.p_pu = freq_watt(freq_hz, d.freq_watt, d.p_available_pu);
        o.q_pu = volt_var(std::abs(pf.node_v.at(node)), d.volt_var, o.p_pu);
        break;
    }
    out.per_der[k] = o;
    const double scale = d.s_rated_mva / feeder.base_mva();
    out.per_node[node] += std::complex<double>(o.p_pu * scale, o.q_pu * scale);
  }
  return out;
}

double max_output_change(const DerOutputs& a, const DerOutputs& b) {
  double change = 0.0;
  for (std::size_t k = 0; k < a.per_der.size(); ++k) {
    change = std::max({change, std::abs(a.per_der[k].p_pu - b.per_der[k].p_pu),
                       std::abs(a.per_der[k].q_pu - b.per_der[k].q_pu)});
  }
  return change;
}

DerPfOptions DerPfOptions::from_config(const CosimConfig& config) {
  DerPfOptions o;
  o.tolerance_pu = config.pf_tolerance;
  o.sweep_tolerance_pu = config.pf_tolerance;
  o.max_rounds = config.max_der_pf_iterations;
  return o;
}

DerPfResult converge_der_pf(const dist::Feeder& feeder, const std::vector<DerUnit>& ders, std::complex<double> head_v,
                            double freq_hz, const DerPfOptions& options) {
  if (options.max_rounds < 1) throw ConfigError("max_der_pf_iterations must be >= 1");
  for (const auto& d : ders) {
    if (!feeder.has_node(d.node)) throw ConfigError("DER " + d.id + " attached to unknown node '" + d.node + "'");
  }
  DerPfResult result;
  result.outputs = zero_outputs(ders.size(), feeder);
  for (int round = 1; round <= options.max_rounds; ++round) {
    result.pf = dist::backward_forward_sweep(feeder, head_v, result.outputs.per_node, options.sweep_tolerance_pu,
                                             options.sweep_max_iterations);
    result.iterations = round;
    if (!std::isfinite(result.pf.max_mismatch_pu)) {
      // Diverged sweep: no voltages to evaluate the DERs against.
      result.last_change_pu = std::numeric_limits<double>::infinity();
      continue;
    }
    DerOutputs next = der_outputs(ders, feeder, result.pf, freq_hz);
    result.last_change_pu = max_output_change(next, result.outputs);
    if (result.pf.converged && result.last_change_pu < options.tolerance_pu) {
      result.converged = true;
      return result;
    }
    result.outputs = std::move(next);
  }
  return result;
}

DerRegistry::DerRegistry(std::vector<DerUnit> ders) : ders_(std::move(ders)) {
  for (const auto& d : ders_) d.validate();
  for (std::size_t i = 0; i < ders_.size(); ++i) {
    for (std::size_t j = i + 1; j < ders_.size(); ++j) {
      if (ders_[i].id == ders_[j].id) throw ConfigError("duplicate DER id '" + ders_[i].id + "'");
    }
  }
}

std::size_t DerRegistry::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ders_.size(); ++i) {
    if (ders_[i].id == id) return i;
  }
  throw ConfigError("unknown DER id '" + id + "'");
}

void DerRegistry::set_connected(const std::vector<std::string>& ids, bool connected, SimTime at) {
  Event e{{}, connected, at.ticks()};
  for (const auto& id : ids) e.targets.push_back(index_of(id));
  events_.push_back(std::move(e));
}

void DerRegistry::set_connected_all(bool connected, SimTime at) {
  Event e{{}, connected, at.ticks()};
  for (std::size_t i = 0; i < ders_.size(); ++i) e.targets.push_back(i);
  events_.push_back(std::move(e));
}

std::size_t DerRegistry::apply_due(SimTime now) {
  // Stable: events due at the same instant apply in scheduling order.
  std::size_t fired = 0;
  std::vector<Event> remaining;
  for (auto& e : events_) {
    if (e.at <= now.ticks()) {
      for (const auto i : e.targets) ders_[i].connected = e.connected;
      ++fired;
    } else {
      remaining.push_back(std::move(e));
    }
  }
  events_.swap(remaining);
  return fired;
}

}  // namespace tdcosim::der
