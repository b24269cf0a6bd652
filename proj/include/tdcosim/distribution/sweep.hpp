#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdcosim/distribution/feeder.hpp"

namespace tdcosim::dist {

struct PfSolution {
  std::vector<std::complex<double>> node_v;  // indexed like Feeder::nodes()
  double head_p_pu = 0.0;
  double head_q_pu = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_mismatch_pu = 0.0;  // last successive voltage change

  std::complex<double> voltage(const Feeder& feeder, const std::string& node) const {
    return node_v.at(feeder.index_of(node));
  }
};

/// Backward/forward sweep. `injections` holds DER output per node index in
/// p.u. on the feeder base and enters as negative load; an empty span means
/// no injections. Iterates until the largest node-voltage change is below
/// `tolerance_pu` or `max_iterations` is reached. Non-convergence is
/// reported through the result, never thrown. Throws ConfigError when the
/// head voltage magnitude is outside (0.5, 1.5) or the injection vector has
/// the wrong length.
PfSolution backward_forward_sweep(const Feeder& feeder, std::complex<double> head_v,
                                  std::span<const std::complex<double>> injections, double tolerance_pu,
                                  int max_iterations);

/// Keyed-by-node-id convenience form.
PfSolution backward_forward_sweep_by_id(const Feeder& feeder, std::complex<double> head_v,
                                        const std::map<std::string, std::pair<double, double>>& injections,
                                        double tolerance_pu, int max_iterations);

/// Per-unit head power to (MW, MVAr).
std::pair<double, double> head_power(const PfSolution& solution, double base_mva_feeder);

/// Total series I^2 Z loss of a solution.
std::complex<double> series_losses(const Feeder& feeder, const PfSolution& solution);

/// Total consumed load power at the solved voltages.
std::complex<double> total_load(const Feeder& feeder, const PfSolution& solution);

}  // namespace tdcosim::dist
