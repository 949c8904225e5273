#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fastla/norms.hpp"

namespace fastla {

/// Measured defects of a computed decomposition. Residuals are relative to
/// the input's norm in `norm_kind` (frobenius throughout the library).
struct StabilityReport {
  double residual = 0.0;
  double orth_defect = 0.0;
  NormKind norm_kind = NormKind::frobenius;
  std::optional<double> cond_estimate;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    for (const auto& x : flags)
      if (x == f) return true;
    return false;
  }
};

}  // namespace fastla
