#pragma once

#include "pim/rational.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace pim {

// Exact tail of a level-indexed series whose per-level sums continue a
// geometric pattern. The certificate is conditional on the pattern holding
// beyond the truncation; callers must say so when they use it.
struct GeometricTailCertificate {
  Rational ratio;          // m_{n+1}/m_n, constant over the built levels
  unsigned last_level;     // N
  Rational tail_sum;       // sum_{n>N} m_n           = m_N * r/(1-r)
  Rational tail_weighted;  // sum_{n>N} n * m_n       = m_N * (N*r/(1-r) + r/(1-r)^2)
};

// level_sums must be sorted by level. Requires at least three consecutive
// levels with exactly equal ratios in (0,1); otherwise nullopt.
std::optional<GeometricTailCertificate> geometric_tail(
    const std::vector<std::pair<unsigned, Rational>>& level_sums);

}  // namespace pim
