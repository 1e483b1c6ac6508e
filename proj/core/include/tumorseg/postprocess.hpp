#pragma once

#include "tumorseg/components.hpp"
#include "tumorseg/volume.hpp"

namespace tumorseg {

struct PostprocessParams {
  /// Components with at most this many voxels count as dust.
  std::size_t dust_max = 50;
  Connectivity foreground_connectivity = Connectivity::k26;
  Connectivity hole_background_connectivity = Connectivity::k6;
};

namespace postprocess {

/// Clears every foreground component of at most `dust_max` voxels.
BinaryMask remove_dust(const BinaryMask& mask, const PostprocessParams& params = {});

/// Background components that do not touch any face of the grid, renumbered
/// 1..count in storage order.
ComponentLabeling find_holes(const BinaryMask& mask, const PostprocessParams& params = {});

/// Dust removal and hole filling across the nested regions:
///  1. remove ET dust (voxels -> 0);
///  2. TC holes created by step 1 -> NCR (1);
///  3. remove TC dust (voxels -> 0);
///  4. WT holes created by step 3 -> ED (2);
///  5. remove WT dust (voxels -> 0).
/// A hole is "created" when its voxels were not inside a hole before the
/// preceding removal.
LabelVolume postprocess_prediction(const LabelVolume& lab, const PostprocessParams& params = {});

/// Removes ground-truth lesions (dilation-grouped components) of at most
/// `dust_max` voxels from each region, then rebuilds labels from the
/// intersected regions so nesting holds.
LabelVolume clean_ground_truth(const LabelVolume& lab, const PostprocessParams& params,
                               int dilation_iters);

}  // namespace postprocess
}  // namespace tumorseg
