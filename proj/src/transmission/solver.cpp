#include "tdcosim/transmission/solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::tx {

namespace {

using cd = std::complex<double>;

Eigen::MatrixXcd build_ybus(const TxNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.buses().size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t k = 0; k < net.lines().size(); ++k) {
    const auto& line = net.lines()[k];
    const auto [f, t] = net.line_indices()[k];
    const cd ys = 1.0 / cd(line.r_pu, line.x_pu);
    const cd ysh(0.0, 0.5 * line.b_shunt_pu);
    const auto fi = static_cast<Eigen::Index>(f);
    const auto ti = static_cast<Eigen::Index>(t);
    y(fi, fi) += ys + ysh;
    y(ti, ti) += ys + ysh;
    y(fi, ti) -= ys;
    y(ti, fi) -= ys;
  }
  return y;
}

}  // namespace

TxState flat_state(const TxNetwork& network, SimTime t) {
  const auto ref = evaluate_reference(network.program(), t);
  TxState s;
  s.time = t;
  s.bus_voltages.assign(network.buses().size(), cd(ref.v_ref_pu, 0.0));
  s.source_v_ref = ref.v_ref_pu;
  s.freq_hz = ref.freq_hz;
  return s;
}

TxState solve_tx(const TxNetwork& network, const TxState& previous, SimTime t, const TxSolveOptions& options) {
  const auto ref = evaluate_reference(network.program(), t);
  const std::size_t nb = network.buses().size();
  const std::size_t src = network.source_index();

  TxState out;
  out.time = t;
  out.source_v_ref = ref.v_ref_pu;
  out.freq_hz = ref.freq_hz;
  out.bus_voltages =
      previous.bus_voltages.size() == nb ? previous.bus_voltages : std::vector<cd>(nb, cd(ref.v_ref_pu, 0.0));
  out.bus_voltages[src] = cd(ref.v_ref_pu, 0.0);
  if (nb == 1) {
    out.iterations = 1;
    return out;
  }

  // Partition into source (s) and load (l) buses.
  std::vector<std::size_t> load_buses;
  for (std::size_t i = 0; i < nb; ++i) {
    if (i != src) load_buses.push_back(i);
  }
  const auto nl = static_cast<Eigen::Index>(load_buses.size());
  const Eigen::MatrixXcd y = build_ybus(network);
  Eigen::MatrixXcd y_ll(nl, nl);
  Eigen::VectorXcd y_ls(nl);
  for (Eigen::Index a = 0; a < nl; ++a) {
    const auto ia = static_cast<Eigen::Index>(load_buses[a]);
    y_ls(a) = y(ia, static_cast<Eigen::Index>(src));
    for (Eigen::Index b = 0; b < nl; ++b) y_ll(a, b) = y(ia, static_cast<Eigen::Index>(load_buses[b]));
  }
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y_ll);
  const Eigen::VectorXcd source_term = y_ls * out.bus_voltages[src];

  Eigen::VectorXcd v(nl);
  for (Eigen::Index a = 0; a < nl; ++a) v(a) = out.bus_voltages[load_buses[a]];

  double mismatch = std::numeric_limits<double>::infinity();
  std::size_t worst = load_buses.front();
  for (int it = 1; it <= options.max_iterations; ++it) {
    Eigen::VectorXcd current(nl);
    for (Eigen::Index a = 0; a < nl; ++a) {
      const auto& load = network.spot_loads()[load_buses[a]];
      current(a) = -std::conj(cd(load.p_pu, load.q_pu) / v(a));
    }
    const Eigen::VectorXcd v_next = lu.solve(current - source_term);
    mismatch = 0.0;
    for (Eigen::Index a = 0; a < nl; ++a) {
      const double d = std::abs(v_next(a) - v(a));
      if (!std::isfinite(d)) {
        throw SolverDivergence(network.buses()[load_buses[a]].id, std::numeric_limits<double>::infinity());
      }
      if (d > mismatch) {
        mismatch = d;
        worst = load_buses[a];
      }
    }
    v = v_next;
    for (Eigen::Index a = 0; a < nl; ++a) {
      if (std::abs(v(a)) < 1e-3) throw SolverDivergence(network.buses()[load_buses[a]].id, mismatch);
    }
    if (mismatch < options.tolerance_pu) {
      out.iterations = it;
      for (Eigen::Index a = 0; a < nl; ++a) out.bus_voltages[load_buses[a]] = v(a);
      return out;
    }
  }
  throw SolverDivergence(network.buses()[worst].id, mismatch);
}

std::complex<double> source_injection(const TxNetwork& network, const TxState& state) {
  cd current(0.0, 0.0);
  const std::size_t src = network.source_index();
  for (std::size_t k = 0; k < network.lines().size(); ++k) {
    const auto& line = network.lines()[k];
    const auto [f, t] = network.line_indices()[k];
    if (f != src && t != src) continue;
    const std::size_t other = f == src ? t : f;
    const cd ys = 1.0 / cd(line.r_pu, line.x_pu);
    current += ys * (state.bus_voltages[src] - state.bus_voltages[other]) +
               cd(0.0, 0.5 * line.b_shunt_pu) * state.bus_voltages[src];
  }
  return state.bus_voltages[src] * std::conj(current);
}

std::complex<double> series_losses(const TxNetwork& network, const TxState& state) {
  cd total(0.0, 0.0);
  for (std::size_t k = 0; k < network.lines().size(); ++k) {
    const auto& line = network.lines()[k];
    const auto [f, t] = network.line_indices()[k];
    const cd z(line.r_pu, line.x_pu);
    const cd i = (state.bus_voltages[f] - state.bus_voltages[t]) / z;
    total += z * std::norm(i);
  }
  return total;
}

std::complex<double> shunt_absorption(const TxNetwork& network, const TxState& state) {
  cd total(0.0, 0.0);
  for (std::size_t k = 0; k < network.lines().size(); ++k) {
    const auto& line = network.lines()[k];
    const auto [f, t] = network.line_indices()[k];
    // S = V conj(jB/2 V) = -j B/2 |V|^2
    total += cd(0.0, -0.5 * line.b_shunt_pu) * (std::norm(state.bus_voltages[f]) + std::norm(state.bus_voltages[t]));
  }
  return total;
}

}  // namespace tdcosim::tx
