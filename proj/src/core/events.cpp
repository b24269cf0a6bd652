#include "tdcosim/core/events.hpp"

namespace tdcosim {

std::string_view to_string(OverrunKind kind) {
  switch (kind) {
    case OverrunKind::TxStep: return "tx_step";
    case OverrunKind::CosimLoop: return "cosim_loop";
    case OverrunKind::DerPfIterationCap: return "der_pf_iteration_cap";
  }
  return "unknown";
}

}  // namespace tdcosim
