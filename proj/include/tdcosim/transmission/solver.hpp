#pragma once

#include <complex>
#include <vector>

#include "tdcosim/core/sim_time.hpp"
#include "tdcosim/transmission/network.hpp"

namespace tdcosim::tx {

struct TxState {
  SimTime time;
  std::vector<std::complex<double>> bus_voltages;  // indexed like TxNetwork::buses()
  double source_v_ref = 1.0;
  double freq_hz = 60.0;
  int iterations = 0;
};

struct TxSolveOptions {
  double tolerance_pu = 1e-10;
  int max_iterations = 100;
};

/// Every bus at the source reference, angle zero.
TxState flat_state(const TxNetwork& network, SimTime t);

/// Quasi-static nodal solve with the source held at the programmed reference
/// and constant-power spot loads. Fixed-point iteration on load currents,
/// warm-started from `previous` when it matches the network size.
/// Throws SolverDivergence when the iteration fails to settle.
TxState solve_tx(const TxNetwork& network, const TxState& previous, SimTime t, const TxSolveOptions& options = {});

/// Complex power leaving the ideal source into the network.
std::complex<double> source_injection(const TxNetwork& network, const TxState& state);

/// Sum of I^2 Z over line series branches.
std::complex<double> series_losses(const TxNetwork& network, const TxState& state);

/// Reactive power absorbed by line charging (negative: shunts generate).
std::complex<double> shunt_absorption(const TxNetwork& network, const TxState& state);

}  // namespace tdcosim::tx
