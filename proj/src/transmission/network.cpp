#include "tdcosim/transmission/network.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::tx {

TxNetwork::TxNetwork(std::vector<Bus> buses, std::vector<PiLine> lines, std::string source_bus,
                     ReferenceProgram program, double base_mva)
    : buses_(std::move(buses)), lines_(std::move(lines)), program_(std::move(program)), base_mva_(base_mva) {
  if (buses_.empty()) throw ConfigError("transmission network has no buses");
  if (!(base_mva_ > 0.0)) throw ConfigError("transmission MVA base must be positive");
  std::unordered_set<std::string> seen;
  for (const auto& b : buses_) {
    if (!seen.insert(b.id).second) throw ConfigError("duplicate bus id '" + b.id + "'");
  }
  source_index_ = index_of(source_bus);
  program_.voltage.validate();
  program_.frequency.validate();

  // Union-find connectivity check while resolving indices.
  std::vector<std::size_t> parent(buses_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& line : lines_) {
    if (line.r_pu == 0.0 && line.x_pu == 0.0) {
      throw ConfigError("line " + line.from_bus + "-" + line.to_bus + " has zero series impedance");
    }
    if (!std::isfinite(line.r_pu) || !std::isfinite(line.x_pu) || !(line.b_shunt_pu >= 0.0)) {
      throw ConfigError("line " + line.from_bus + "-" + line.to_bus + " has invalid parameters");
    }
    const LineIndex idx{index_of(line.from_bus), index_of(line.to_bus)};
    if (idx.from == idx.to) throw ConfigError("line " + line.from_bus + " is a self loop");
    line_indices_.push_back(idx);
    parent[find(idx.from)] = find(idx.to);
  }
  const auto root = find(0);
  for (std::size_t i = 1; i < buses_.size(); ++i) {
    if (find(i) != root) throw ConfigError("transmission network is not connected (bus '" + buses_[i].id + "')");
  }
  spot_loads_.assign(buses_.size(), SpotLoad{});
}

TxNetwork TxNetwork::two_bus(const PiLine& line, ReferenceProgram program, double base_mva) {
  return TxNetwork({{line.from_bus, 230.0}, {line.to_bus, 230.0}}, {line}, line.from_bus, std::move(program),
                   base_mva);
}

void TxNetwork::set_program(ReferenceProgram program) {
  program.voltage.validate();
  program.frequency.validate();
  program_ = std::move(program);
}

std::size_t TxNetwork::index_of(const std::string& bus_id) const {
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].id == bus_id) return i;
  }
  throw ConfigError("unknown transmission bus '" + bus_id + "'");
}

bool TxNetwork::has_bus(const std::string& bus_id) const {
  for (const auto& b : buses_) {
    if (b.id == bus_id) return true;
  }
  return false;
}

void TxNetwork::set_spot_load(const std::string& bus_id, double p_pu, double q_pu) {
  spot_loads_[index_of(bus_id)] = SpotLoad{p_pu, q_pu};
}

TxNetwork apply_spot_load(TxNetwork network, const std::string& bus, double p_pu, double q_pu) {
  network.set_spot_load(bus, p_pu, q_pu);
  return network;
}

}  // namespace tdcosim::tx
