#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qmeta {

/// Success count mapped to [0, 1] on a log scale:
/// log10(1 + count) / log10(1 + c_target). Counts above the target saturate.
inline double encode_observation(std::uint64_t count, std::uint64_t c_target) {
  if (c_target < 1) throw std::invalid_argument("c_target must be >= 1");
  const auto c = std::min(count, c_target);
  return std::log10(1.0 + static_cast<double>(c)) /
         std::log10(1.0 + static_cast<double>(c_target));
}

}  // namespace qmeta
