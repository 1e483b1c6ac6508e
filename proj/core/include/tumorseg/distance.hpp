#pragma once

#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg {

/// Exact squared Euclidean distance (mm^2, spacing-scaled) from every voxel
/// to the nearest set voxel of `features`. Infinity when `features` is empty.
std::vector<double> squared_distance_transform(const BinaryMask& features,
                                               const Spacing& spacing);

/// Distances from each boundary voxel of `from` to the nearest boundary
/// voxel of `to`, in storage order of the `from` voxels.
std::vector<double> directed_boundary_distances(const BinaryMask& from, const BinaryMask& to,
                                                const Spacing& spacing);

/// 95th-percentile symmetric Hausdorff distance between mask boundaries:
/// max of the two directed 95th percentiles. Throws EmptyMaskError when
/// either mask is empty and ShapeError on mismatched shapes.
double hd95(const BinaryMask& pred, const BinaryMask& gt, const Spacing& spacing);

}  // namespace tumorseg
