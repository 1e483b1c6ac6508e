#pragma once

#include "tumorseg/volume.hpp"

namespace tumorseg {

/// `iters` rounds of binary dilation by the 3x3x3 cube. Voxels outside the
/// grid count as background. Throws ConfigError for negative `iters`.
BinaryMask dilate(const BinaryMask& mask, int iters);

/// Foreground voxels with at least one 6-neighbor outside the mask; the
/// grid exterior counts as outside.
BinaryMask boundary(const BinaryMask& mask);

}  // namespace tumorseg
