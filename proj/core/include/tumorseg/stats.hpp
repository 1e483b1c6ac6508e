#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg {

/// p-th percentile (p in [0, 100]) of already-sorted values, linearly
/// interpolated at rank p/100 * (n - 1). Throws DegenerateInput when empty.
double percentile_sorted(std::span<const double> sorted, double p);

/// Same as percentile_sorted but sorts a copy first.
double percentile(std::span<const double> values, double p);

/// Percentile over the volume, or over the voxels selected by `mask`.
double percentile(const ScalarVolume& vol, double p,
                  const std::optional<BinaryMask>& mask = std::nullopt);

/// Values of `vol` where `mask` is set, in storage order.
std::vector<double> masked_values(const ScalarVolume& vol, const BinaryMask& mask);

struct MaskedMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Mean and population standard deviation over masked voxels, summed in
/// storage order.
MaskedMoments masked_moments(const ScalarVolume& vol, const BinaryMask& mask);

}  // namespace tumorseg
