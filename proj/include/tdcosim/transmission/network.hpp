#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "tdcosim/transmission/reference.hpp"

namespace tdcosim::tx {

struct Bus {
  std::string id;
  double nominal_kv = 0.0;
};

/// Series r + jx with total shunt susceptance b split half per end.
struct PiLine {
  std::string from_bus;
  std::string to_bus;
  double r_pu = 0.0;
  double x_pu = 0.0;
  double b_shunt_pu = 0.0;
};

/// Constant-power spot load in p.u. on the transmission base.
struct SpotLoad {
  double p_pu = 0.0;
  double q_pu = 0.0;
};

/// Small phasor network fed by one ideal voltage source. Validated on
/// construction: connected, exactly one source, non-degenerate branches.
class TxNetwork {
 public:
  TxNetwork(std::vector<Bus> buses, std::vector<PiLine> lines, std::string source_bus, ReferenceProgram program,
            double base_mva = 100.0);

  /// Prototype network: source bus -> pi-line -> load bus.
  static TxNetwork two_bus(const PiLine& line, ReferenceProgram program, double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<PiLine>& lines() const { return lines_; }
  const std::string& source_bus() const { return buses_[source_index_].id; }
  std::size_t source_index() const { return source_index_; }
  const ReferenceProgram& program() const { return program_; }
  void set_program(ReferenceProgram program);
  double base_mva() const { return base_mva_; }

  /// Throws ConfigError for unknown ids.
  std::size_t index_of(const std::string& bus_id) const;
  bool has_bus(const std::string& bus_id) const;

  const std::vector<SpotLoad>& spot_loads() const { return spot_loads_; }
  void set_spot_load(const std::string& bus_id, double p_pu, double q_pu);

  /// Line endpoints resolved to bus indices, parallel to lines().
  struct LineIndex {
    std::size_t from;
    std::size_t to;
  };
  const std::vector<LineIndex>& line_indices() const { return line_indices_; }

 private:
  std::vector<Bus> buses_;
  std::vector<PiLine> lines_;
  std::vector<LineIndex> line_indices_;
  std::vector<SpotLoad> spot_loads_;
  std::size_t source_index_ = 0;
  ReferenceProgram program_;
  double base_mva_ = 100.0;
};

/// Returns a copy with the load at `bus` replaced. Throws ConfigError for an
/// unknown bus.
TxNetwork apply_spot_load(TxNetwork network, const std::string& bus, double p_pu, double q_pu);

}  // namespace tdcosim::tx
