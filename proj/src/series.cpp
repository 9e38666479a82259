#include "pim/series.hpp"

namespace pim {

std::optional<GeometricTailCertificate> geometric_tail(
    const std::vector<std::pair<unsigned, Rational>>& level_sums) {
  if (level_sums.size() < 3) return std::nullopt;
  for (std::size_t i = 0; i + 1 < level_sums.size(); ++i)
    if (level_sums[i + 1].first != level_sums[i].first + 1) return std::nullopt;
  for (const auto& [level, sum] : level_sums)
    if (sum <= 0) return std::nullopt;

  Rational ratio = level_sums[1].second / level_sums[0].second;
  if (!(ratio > 0 && ratio < 1)) return std::nullopt;
  for (std::size_t i = 1; i + 1 < level_sums.size(); ++i)
    if (level_sums[i + 1].second / level_sums[i].second != ratio) return std::nullopt;

  const auto& [last_level, last_sum] = level_sums.back();
  Rational geo = ratio / (1 - ratio);
  GeometricTailCertificate cert;
  cert.ratio = ratio;
  cert.last_level = last_level;
  cert.tail_sum = last_sum * geo;
  cert.tail_weighted = last_sum * (last_level * geo + ratio / ((1 - ratio) * (1 - ratio)));
  return cert;
}

}  // namespace pim
