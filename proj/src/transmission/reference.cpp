#include "tdcosim/transmission/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::tx {

SignalProgram SignalProgram::constant(double value) {
  SignalProgram p;
  p.base = value;
  return p;
}

SignalProgram SignalProgram::step(double base, double delta, Ticks at) {
  SignalProgram p;
  p.kind = Kind::Step;
  p.base = base;
  p.step_delta = delta;
  p.step_time = at;
  return p;
}

SignalProgram SignalProgram::ramp(double base, double rate_per_s, Ticks start, Ticks end) {
  SignalProgram p;
  p.kind = Kind::Ramp;
  p.base = base;
  p.ramp_rate_per_s = rate_per_s;
  p.ramp_start = start;
  p.ramp_end = end;
  return p;
}

SignalProgram SignalProgram::sine(double base, double amplitude, double freq_hz, double phase_rad) {
  SignalProgram p;
  p.kind = Kind::Sine;
  p.base = base;
  p.amplitude = amplitude;
  p.freq_hz = freq_hz;
  p.phase_rad = phase_rad;
  return p;
}

double SignalProgram::evaluate(Ticks t) const {
  switch (kind) {
    case Kind::Constant:
      return base;
    case Kind::Step:
      return t < step_time ? base : base + step_delta;
    case Kind::Ramp: {
      const Ticks clamped = std::clamp(t, ramp_start, ramp_end);
      return base + ramp_rate_per_s * ticks_to_seconds(clamped - ramp_start);
    }
    case Kind::Sine:
      return base + amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * ticks_to_seconds(t) + phase_rad);
  }
  return base;
}

void SignalProgram::validate() const {
  if (!std::isfinite(base)) throw ConfigError("signal base must be finite");
  if (kind == Kind::Sine && !(amplitude >= 0.0)) throw ConfigError("sine amplitude must be >= 0");
  if (kind == Kind::Sine && !(freq_hz >= 0.0)) throw ConfigError("sine frequency must be >= 0");
  if (kind == Kind::Step && step_time < 0) throw ConfigError("step time must be >= 0");
  if (kind == Kind::Ramp && ramp_end < ramp_start) throw ConfigError("ramp end precedes ramp start");
}

ReferenceValue evaluate_reference(const ReferenceProgram& program, SimTime t) {
  return {program.voltage.evaluate(t.ticks()), program.frequency.evaluate(t.ticks())};
}

}  // namespace tdcosim::tx
