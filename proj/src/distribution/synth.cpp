#include "tdcosim/distribution/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/core/units.hpp"

namespace tdcosim::dist {

namespace {

// Draws from the raw engine output so results do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

std::string node_name(std::size_t i) { return "n" + std::to_string(i); }

}  // namespace

Feeder synthesize_feeder(std::size_t n_nodes, double total_p_mw, double total_q_mvar, std::uint64_t topology_seed,
                         double der_fraction, const FeederSynthesisOptions& options) {
  if (n_nodes < 2) throw ConfigError("synthetic feeder needs at least 2 nodes");
  if (!(der_fraction >= 0.0 && der_fraction <= 1.0)) throw ConfigError("der_fraction must lie in [0, 1]");

  Rng rng(topology_seed);
  const std::size_t depth_cap =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n_nodes)))), 1,
                              n_nodes - 1);
  const double r_share = options.path_r_pu / static_cast<double>(depth_cap);

  std::vector<FeederNode> nodes;
  nodes.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) nodes.push_back({node_name(i), options.nominal_kv});

  std::vector<std::size_t> parent(n_nodes, 0);
  std::vector<std::size_t> depth(n_nodes, 0);
  std::vector<std::size_t> attachable{0};  // nodes with depth < depth_cap
  std::vector<FeederBranch> branches;
  branches.reserve(n_nodes - 1);
  for (std::size_t i = 1; i < n_nodes; ++i) {
    const std::size_t p = i <= depth_cap ? i - 1 : attachable[rng.below(attachable.size())];
    parent[i] = p;
    depth[i] = depth[p] + 1;
    if (depth[i] < depth_cap) attachable.push_back(i);
    const double r = r_share * rng.uniform(0.5, 1.5);
    const double x = r * rng.uniform(options.xr_min, options.xr_max);
    branches.push_back({node_name(p), node_name(i), r, x});
  }

  std::vector<bool> is_leaf(n_nodes, true);
  for (std::size_t i = 1; i < n_nodes; ++i) is_leaf[parent[i]] = false;
  std::vector<double> weight(n_nodes, 0.0);
  double weight_sum = 0.0;
  for (std::size_t i = 1; i < n_nodes; ++i) {
    weight[i] = (is_leaf[i] ? options.leaf_bias : 1.0) * rng.uniform(0.5, 1.5);
    weight_sum += weight[i];
  }

  const double p_total = to_per_unit(total_p_mw, options.base_mva);
  const double q_total = to_per_unit(total_q_mvar, options.base_mva);
  std::map<std::string, ZipLoad> loads;
  double p_acc = 0.0;
  double q_acc = 0.0;
  for (std::size_t i = 1; i < n_nodes; ++i) {
    ZipLoad load{0.0, 0.0, options.z_frac, options.i_frac, options.p_frac};
    if (i + 1 < n_nodes) {
      load.p0_pu = p_total * weight[i] / weight_sum;
      load.q0_pu = q_total * weight[i] / weight_sum;
      p_acc += load.p0_pu;
      q_acc += load.q0_pu;
    } else {
      load.p0_pu = p_total - p_acc;
      load.q0_pu = q_total - q_acc;
    }
    loads.emplace(node_name(i), load);
  }

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i < n_nodes; ++i) candidates.push_back(i);
  for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[rng.below(i)]);
  const auto n_der = std::min<std::size_t>(
      static_cast<std::size_t>(std::lround(der_fraction * static_cast<double>(n_nodes))), n_nodes - 1);
  candidates.resize(n_der);
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::string> der_nodes;
  for (const auto i : candidates) der_nodes.push_back(node_name(i));

  return Feeder(std::move(nodes), std::move(branches), std::move(loads), std::move(der_nodes), options.base_mva,
                node_name(0), options.feeder_id);
}

}  // namespace tdcosim::dist
