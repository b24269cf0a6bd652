#include "tdcosim/distribution/sweep.hpp"

#include <cmath>
#include <limits>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/core/units.hpp"

namespace tdcosim::dist {

namespace {

using cd = std::complex<double>;

void node_currents(const Feeder& feeder, std::span<const cd> v, std::span<const cd> injections, std::vector<cd>& out) {
  const auto& loads = feeder.load_by_index();
  for (std::size_t i = 0; i < v.size(); ++i) {
    cd s = loads[i].power_at(std::abs(v[i]));
    if (!injections.empty()) s -= injections[i];
    out[i] = std::conj(s / v[i]);
  }
}

// Aggregates node currents leaf-to-root into the branch current feeding each
// node. branch[head] ends up as the total current drawn from the source.
void backward(const Feeder& feeder, std::vector<cd>& branch) {
  const auto& order = feeder.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto i = *it;
    if (i != feeder.head()) branch[feeder.parent(i)] += branch[i];
  }
}

}  // namespace

PfSolution backward_forward_sweep(const Feeder& feeder, cd head_v, std::span<const cd> injections,
                                        double tolerance_pu, int max_iterations) {
  const double head_mag = std::abs(head_v);
  if (!(head_mag > 0.5 && head_mag < 1.5)) {
    throw ConfigError("feeder head voltage " + std::to_string(head_mag) + " pu outside (0.5, 1.5)");
  }
  if (!injections.empty() && injections.size() != feeder.size()) {
    throw ConfigError("injection vector length does not match feeder size");
  }
  if (max_iterations < 1 || !(tolerance_pu > 0.0)) throw ConfigError("invalid sweep tolerance or iteration cap");

  const std::size_t n = feeder.size();
  PfSolution sol;
  sol.node_v.assign(n, head_v);
  std::vector<cd> current(n);

  sol.max_mismatch_pu = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    node_currents(feeder, sol.node_v, injections, current);
    backward(feeder, current);
    double change = 0.0;
    bool finite = true;
    for (const auto i : feeder.order()) {
      if (i == feeder.head()) continue;
      const cd v_new = sol.node_v[feeder.parent(i)] - feeder.branch_z(i) * current[i];
      const double d = std::abs(v_new - sol.node_v[i]);
      if (!std::isfinite(d) || std::abs(v_new) < 1e-6) finite = false;
      change = std::max(change, d);
      sol.node_v[i] = v_new;
    }
    sol.iterations = it;
    if (!finite) {
      sol.max_mismatch_pu = std::numeric_limits<double>::infinity();
      break;
    }
    sol.max_mismatch_pu = change;
    if (change < tolerance_pu) {
      sol.converged = true;
      break;
    }
  }

  if (std::isfinite(sol.max_mismatch_pu)) {
    node_currents(feeder, sol.node_v, injections, current);
    backward(feeder, current);
    const cd s_head = head_v * std::conj(current[feeder.head()]);
    sol.head_p_pu = s_head.real();
    sol.head_q_pu = s_head.imag();
  } else {
    sol.head_p_pu = std::numeric_limits<double>::quiet_NaN();
    sol.head_q_pu = std::numeric_limits<double>::quiet_NaN();
  }
  return sol;
}

PfSolution backward_forward_sweep_by_id(const Feeder& feeder, cd head_v,
                                        const std::map<std::string, std::pair<double, double>>& injections,
                                        double tolerance_pu, int max_iterations) {
  std::vector<cd> dense(feeder.size(), cd(0.0, 0.0));
  for (const auto& [node, pq] : injections) dense[feeder.index_of(node)] += cd(pq.first, pq.second);
  return backward_forward_sweep(feeder, head_v, dense, tolerance_pu, max_iterations);
}

std::pair<double, double> head_power(const PfSolution& solution, double base_mva_feeder) {
  return {from_per_unit(solution.head_p_pu, base_mva_feeder), from_per_unit(solution.head_q_pu, base_mva_feeder)};
}

std::complex<double> series_losses(const Feeder& feeder, const PfSolution& solution) {
  cd total(0.0, 0.0);
  for (const auto i : feeder.order()) {
    if (i == feeder.head()) continue;
    const cd z = feeder.branch_z(i);
    const cd j = (solution.node_v[feeder.parent(i)] - solution.node_v[i]) / z;
    total += z * std::norm(j);
  }
  return total;
}

std::complex<double> total_load(const Feeder& feeder, const PfSolution& solution) {
  cd total(0.0, 0.0);
  for (std::size_t i = 0; i < feeder.size(); ++i) total += feeder.load_by_index()[i].power_at(std::abs(solution.node_v[i]));
  return total;
}

}  // namespace tdcosim::dist
