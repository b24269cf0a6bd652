#pragma once

#include <string_view>

namespace tdcosim::der {

/// Piecewise-linear volt-var curve with a deadband between v2 and v3.
/// Defaults are the IEEE 1547-2018 Category B values.
struct VoltVarCurve {
  double v1 = 0.92;
  double v2 = 0.98;
  double v3 = 1.02;
  double v4 = 1.08;
  double q1 = 0.44;   // injection (capacitive) at low voltage, p.u. of rating
  double q4 = -0.44;  // absorption at high voltage

  void validate() const;
};

/// Over-frequency active power curtailment.
struct FreqWattParams {
  double deadband_hz = 0.036;
  double droop_pu = 0.05;
  double f_nominal_hz = 60.0;

  void validate() const;
};

enum class GsfMode { ConstantPQ, VoltVar, FreqWatt, VoltVarPlusFreqWatt };

std::string_view to_string(GsfMode mode);
GsfMode gsf_mode_from_string(std::string_view name);

/// Largest |q| the inverter can deliver at active power p (both p.u. of rating).
double reactive_headroom(double p_pu);

/// Reactive power command for POI voltage `v_poi_pu`, clipped to the
/// capability circle with active power priority.
double volt_var(double v_poi_pu, const VoltVarCurve& curve, double p_pu);

/// Active power after over-frequency droop. Under-frequency leaves p
/// unchanged.
double freq_watt(double f_hz, const FreqWattParams& params, double p_pre_pu);

}  // namespace tdcosim::der
