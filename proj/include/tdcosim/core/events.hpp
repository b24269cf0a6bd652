#pragma once

#include <cstdint>
#include <string_view>

namespace tdcosim {

enum class OverrunKind { TxStep, CosimLoop, DerPfIterationCap };

std::string_view to_string(OverrunKind kind);

/// A step that exceeded its budget. For TxStep and CosimLoop the values are
/// seconds. For DerPfIterationCap they are the final DER output change and
/// the tolerance it failed to meet, both in p.u. of rating.
struct OverrunEvent {
  OverrunKind kind = OverrunKind::TxStep;
  std::int64_t step_index = 0;
  double measured = 0.0;
  double budget = 0.0;
};

}  // namespace tdcosim
