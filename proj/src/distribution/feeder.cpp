#include "tdcosim/distribution/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::dist {

void ZipLoad::validate() const {
  const auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!in_unit(z_frac) || !in_unit(i_frac) || !in_unit(p_frac)) throw ConfigError("ZIP fractions must lie in [0,1]");
  if (std::abs(z_frac + i_frac + p_frac - 1.0) > 1e-9) throw ConfigError("ZIP fractions must sum to 1");
  if (!std::isfinite(p0_pu) || !std::isfinite(q0_pu)) throw ConfigError("ZIP nominal power must be finite");
}

Feeder::Feeder(std::vector<FeederNode> nodes, std::vector<FeederBranch> branches, std::map<std::string, ZipLoad> loads,
               std::vector<std::string> der_nodes, double base_mva, std::string head_id, std::string id)
    : id_(std::move(id)),
      nodes_(std::move(nodes)),
      branches_(std::move(branches)),
      loads_(std::move(loads)),
      der_nodes_(std::move(der_nodes)),
      base_mva_(base_mva) {
  if (nodes_.empty()) throw ConfigError("feeder has no nodes");
  if (!(base_mva_ > 0.0)) throw ConfigError("feeder MVA base must be positive");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) throw ConfigError("duplicate feeder node '" + nodes_[i].id + "'");
  }
  head_ = head_id.empty() ? 0 : index_of(head_id);
  if (branches_.size() != nodes_.size() - 1) {
    throw ConfigError("feeder is not a tree: " + std::to_string(branches_.size()) + " branches for " +
                      std::to_string(nodes_.size()) + " nodes");
  }

  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::pair<std::size_t, std::complex<double>>>> adj(n);
  for (const auto& b : branches_) {
    const std::complex<double> z(b.r_pu, b.x_pu);
    if (!std::isfinite(b.r_pu) || !std::isfinite(b.x_pu) || !(std::abs(z) > 0.0)) {
      throw ConfigError("branch " + b.from + "-" + b.to + " must have finite non-zero impedance");
    }
    const auto f = index_of(b.from);
    const auto t = index_of(b.to);
    if (f == t) throw ConfigError("branch " + b.from + " is a self loop");
    adj[f].emplace_back(t, z);
    adj[t].emplace_back(f, z);
  }

  constexpr auto unvisited = static_cast<std::size_t>(-1);
  parent_.assign(n, unvisited);
  branch_z_.assign(n, {0.0, 0.0});
  depth_.assign(n, 0);
  std::deque<std::size_t> queue{head_};
  parent_[head_] = head_;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    order_.push_back(u);
    for (const auto& [v, z] : adj[u]) {
      if (parent_[v] != unvisited) continue;
      parent_[v] = u;
      branch_z_[v] = z;
      depth_[v] = depth_[u] + 1;
      queue.push_back(v);
    }
  }
  if (order_.size() != n) throw ConfigError("feeder branches contain a cycle or leave nodes disconnected");

  load_by_index_.assign(n, ZipLoad{0.0, 0.0, 0.0, 0.0, 1.0});
  for (const auto& [node, load] : loads_) {
    load.validate();
    load_by_index_[index_of(node)] = load;
  }
  for (const auto& d : der_nodes_) index_of(d);
}

std::size_t Feeder::index_of(const std::string& node_id) const {
  const auto it = index_.find(node_id);
  if (it == index_.end()) throw ConfigError("unknown feeder node '" + node_id + "'");
  return it->second;
}

bool Feeder::has_node(const std::string& node_id) const { return index_.contains(node_id); }

std::size_t Feeder::max_depth() const { return *std::max_element(depth_.begin(), depth_.end()); }

}  // namespace tdcosim::dist
