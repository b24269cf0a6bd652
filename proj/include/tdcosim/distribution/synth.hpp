#pragma once

#include <cstdint>

#include "tdcosim/distribution/feeder.hpp"

namespace tdcosim::dist {

struct FeederSynthesisOptions {
  double base_mva = 10.0;
  double nominal_kv = 12.47;
  // Total resistance budget along the deepest path, split evenly across its
  // branches; each branch draws r in [0.5, 1.5] x the per-branch share and
  // x/r in [xr_min, xr_max].
  double path_r_pu = 0.02;
  double xr_min = 1.5;
  double xr_max = 2.5;
  // Relative weight of leaf nodes when spreading load.
  double leaf_bias = 3.0;
  double z_frac = 0.4;
  double i_frac = 0.3;
  double p_frac = 0.3;
  std::string feeder_id = "feeder";
};

/// Seeded random radial feeder. The tree has a trunk of depth
/// round(sqrt(n)) so that its maximum depth equals that value; remaining
/// nodes attach to uniformly drawn parents above the depth cap. Load is
/// spread over non-head nodes with leaf-biased weights and sums exactly to
/// the requested totals. round(der_fraction * n) non-head nodes are flagged
/// as DER attachment points. Same arguments give an identical feeder.
/// Throws ConfigError for n_nodes < 2 or der_fraction outside [0, 1].
Feeder synthesize_feeder(std::size_t n_nodes, double total_p_mw, double total_q_mvar, std::uint64_t topology_seed,
                         double der_fraction, const FeederSynthesisOptions& options = {});

}  // namespace tdcosim::dist
