#pragma once

#include <stdexcept>
#include <string>

namespace tdcosim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad config values, malformed networks, unknown ids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A nodal solve failed to converge (typically load beyond maximum transfer).
class SolverDivergence : public Error {
 public:
  SolverDivergence(std::string bus_id, double mismatch_pu)
      : Error("solver diverged at bus '" + bus_id + "' (mismatch " + std::to_string(mismatch_pu) + " pu)"),
        bus_id_(std::move(bus_id)),
        mismatch_pu_(mismatch_pu) {}

  const std::string& bus_id() const noexcept { return bus_id_; }
  double mismatch_pu() const noexcept { return mismatch_pu_; }

 private:
  std::string bus_id_;
  double mismatch_pu_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

/// Raised by the transmission loop when a step hook throws.
class HookError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdcosim
