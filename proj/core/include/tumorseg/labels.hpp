#pragma once

#include "tumorseg/volume.hpp"

namespace tumorseg {

/// Overlapping evaluation regions, always ordered (ET, TC, WT).
/// Invariant: et ⊆ tc ⊆ wt.
struct RegionSet {
  BinaryMask et;
  BinaryMask tc;
  BinaryMask wt;
};

/// Per-region probabilities in [0, 1], ordered (ET, TC, WT).
struct RegionProbs {
  ScalarVolume et;
  ScalarVolume tc;
  ScalarVolume wt;

  /// Throws ShapeError on mismatched channels and ConfigError on values
  /// outside [0, 1].
  void validate() const;
};

/// Rejection thresholds for the WT -> TC -> ET cascade.
struct Thresholds {
  double wt = 0.45;
  double tc = 0.4;
  double et = 0.45;

  /// Throws ConfigError unless every threshold lies in (0, 1).
  void validate() const;
};

namespace labels {

/// et = {3}, tc = {1, 3}, wt = {1, 2, 3}.
RegionSet to_regions(const LabelVolume& lab);

/// Inverse of to_regions. Throws RegionNestingError if et ⊄ tc or tc ⊄ wt.
LabelVolume from_regions(const RegionSet& rs);

/// Per voxel: wt < th.wt -> 0, else tc < th.tc -> 2, else et < th.et -> 1,
/// else 3. A probability equal to its threshold passes.
LabelVolume threshold_cascade(const RegionProbs& probs, const Thresholds& th = {});

/// Throws RegionNestingError unless et ⊆ tc ⊆ wt.
void check_nesting(const RegionSet& rs);

}  // namespace labels
}  // namespace tumorseg
