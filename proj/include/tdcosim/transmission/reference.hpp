#pragma once

#include "tdcosim/core/sim_time.hpp"

namespace tdcosim::tx {

/// Piecewise signal used for both the source voltage magnitude and the
/// system frequency.
struct SignalProgram {
  enum class Kind { Constant, Step, Ramp, Sine };

  Kind kind = Kind::Constant;
  double base = 1.0;

  // Step: base for t < step_time, base + step_delta for t >= step_time.
  double step_delta = 0.0;
  Ticks step_time = 0;

  // Ramp: linear from ramp_start to ramp_end at ramp_rate_per_s, held after.
  double ramp_rate_per_s = 0.0;
  Ticks ramp_start = 0;
  Ticks ramp_end = 0;

  // Sine: base + amplitude * sin(2*pi*freq*t + phase).
  double amplitude = 0.0;
  double freq_hz = 0.0;
  double phase_rad = 0.0;

  static SignalProgram constant(double value);
  static SignalProgram step(double base, double delta, Ticks at);
  static SignalProgram ramp(double base, double rate_per_s, Ticks start, Ticks end);
  static SignalProgram sine(double base, double amplitude, double freq_hz, double phase_rad = 0.0);

  double evaluate(Ticks t) const;
  void validate() const;
};

struct ReferenceProgram {
  SignalProgram voltage = SignalProgram::constant(1.0);
  SignalProgram frequency = SignalProgram::constant(60.0);
};

struct ReferenceValue {
  double v_ref_pu = 1.0;
  double freq_hz = 60.0;
};

ReferenceValue evaluate_reference(const ReferenceProgram& program, SimTime t);

}  // namespace tdcosim::tx
