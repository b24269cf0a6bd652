#include "tdcosim/der/gsf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::der {

void VoltVarCurve::validate() const {
  if (!(v1 < v2 && v2 <= v3 && v3 < v4)) throw ConfigError("volt-var breakpoints must satisfy v1 < v2 <= v3 < v4");
  if (!(q1 >= 0.0 && q4 <= 0.0)) throw ConfigError("volt-var limits must satisfy q1 >= 0 >= q4");
}

void FreqWattParams::validate() const {
  if (!(deadband_hz >= 0.0)) throw ConfigError("frequency-watt deadband must be >= 0");
  if (!(droop_pu > 0.0)) throw ConfigError("frequency-watt droop must be > 0");
  if (!(f_nominal_hz > 0.0)) throw ConfigError("nominal frequency must be > 0");
}

std::string_view to_string(GsfMode mode) {
  switch (mode) {
    case GsfMode::ConstantPQ: return "constant_pq";
    case GsfMode::VoltVar: return "volt_var";
    case GsfMode::FreqWatt: return "freq_watt";
    case GsfMode::VoltVarPlusFreqWatt: return "volt_var+freq_watt";
  }
  return "unknown";
}

GsfMode gsf_mode_from_string(std::string_view name) {
  if (name == "constant_pq") return GsfMode::ConstantPQ;
  if (name == "volt_var") return GsfMode::VoltVar;
  if (name == "freq_watt") return GsfMode::FreqWatt;
  if (name == "volt_var+freq_watt") return GsfMode::VoltVarPlusFreqWatt;
  throw ConfigError("unknown grid-support mode '" + std::string(name) + "'");
}

double reactive_headroom(double p_pu) { return std::sqrt(std::max(0.0, 1.0 - p_pu * p_pu)); }

double volt_var(double v, const VoltVarCurve& c, double p_pu) {
  double q = 0.0;
  if (v <= c.v1) {
    q = c.q1;
  } else if (v < c.v2) {
    q = c.q1 * (c.v2 - v) / (c.v2 - c.v1);
  } else if (v <= c.v3) {
    q = 0.0;
  } else if (v < c.v4) {
    q = c.q4 * (v - c.v3) / (c.v4 - c.v3);
  } else {
    q = c.q4;
  }
  const double limit = reactive_headroom(p_pu);
  return std::clamp(q, -limit, limit);
}

double freq_watt(double f_hz, const FreqWattParams& params, double p_pre_pu) {
  // Tolerate representation error at the deadband edge (60.036 - 60 > 0.036).
  const double excess = f_hz - params.f_nominal_hz - params.deadband_hz;
  if (excess <= 1e-12) return p_pre_pu;
  return std::max(0.0, p_pre_pu - excess / (params.f_nominal_hz * params.droop_pu));
}

}  // namespace tdcosim::der
