#include "tumorseg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tumorseg/errors.hpp"

namespace tumorseg {

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DegenerateInput("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw ConfigError("percentile rank must lie in [0, 100], got " + std::to_string(p));
  }
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, p);
}

std::vector<double> masked_values(const ScalarVolume& vol, const BinaryMask& mask) {
  require_same_shape(vol.shape(), mask.shape(), "masked_values");
  std::vector<double> out;
  out.reserve(mask.count());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (mask[i]) out.push_back(vol[i]);
  }
  return out;
}

double percentile(const ScalarVolume& vol, double p, const std::optional<BinaryMask>& mask) {
  if (mask) {
    auto values = masked_values(vol, *mask);
    if (values.empty()) throw DegenerateInput("percentile over an empty mask");
    return percentile(values, p);
  }
  return percentile(vol.data(), p);
}

MaskedMoments masked_moments(const ScalarVolume& vol, const BinaryMask& mask) {
  require_same_shape(vol.shape(), mask.shape(), "masked_moments");
  MaskedMoments m;
  double sum = 0.0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (mask[i]) {
      sum += vol[i];
      ++m.count;
    }
  }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);
  double ss = 0.0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (mask[i]) {
      const double d = vol[i] - m.mean;
      ss += d * d;
    }
  }
  m.stddev = std::sqrt(ss / static_cast<double>(m.count));
  return m;
}

}  // namespace tumorseg
