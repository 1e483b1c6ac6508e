#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tumorseg/labels.hpp"
#include "tumorseg/volume.hpp"

namespace tumorseg {

/// Connected components (26-connectivity) grouped together because their
/// dilated footprints overlap. Holds only original, undilated voxels.
struct Lesion {
  std::vector<std::size_t> voxels;           // flat indices, ascending
  std::vector<std::uint32_t> component_ids;  // ascending
  std::size_t size() const noexcept { return voxels.size(); }
};

struct LesionMatchParams {
  /// Rounds of 3x3x3 dilation used to group components and to build the
  /// ground-truth footprint.
  int dilation_iters = 3;
  /// Ground-truth lesions with at most this many voxels are ignored.
  std::size_t gt_min_size = 50;
  double fp_hd95_penalty = 374.0;  // mm
  double fn_hd95_penalty = 374.0;  // mm

  /// Throws ConfigError on negative iterations or non-positive penalties.
  void validate() const;
};

namespace metrics {

/// Lesions of `mask`, ordered by their first voxel in storage order.
std::vector<Lesion> identify_lesions(const BinaryMask& mask, int dilation_iters);

/// The voxels of `lesion` as a mask over `geometry`.
BinaryMask lesion_mask(const Lesion& lesion, const Geometry& geometry);

/// 2|P ∩ G| / (|P| + |G|); 1 when both are empty.
double legacy_dice(const BinaryMask& pred, const BinaryMask& gt);

struct LesionScores {
  double dice = 0.0;
  double hd95 = 0.0;
  std::size_t tp = 0;       // scored ground-truth lesions with a match
  std::size_t fp = 0;       // predicted lesions matching nothing
  std::size_t fn = 0;       // scored ground-truth lesions without a match
  std::size_t ignored = 0;  // ground-truth lesions at or below gt_min_size
};

/// Lesion-wise Dice and HD95 with equal weight per lesion. Ground-truth
/// lesions of size <= gt_min_size are ignored. A predicted lesion is
/// assigned to the first scored ground-truth lesion whose dilated footprint
/// it intersects; failing that, one that touches only ignored footprints is
/// discarded, and any other is a false positive. Each false negative or
/// false positive adds 0 to the Dice sum and its penalty to the HD95 sum.
LesionScores lesion_wise_scores(const BinaryMask& pred, const BinaryMask& gt,
                                const LesionMatchParams& params, const Spacing& spacing);

struct RegionReport {
  double lesion_wise_dice = 0.0;
  double lesion_wise_hd95 = 0.0;
  double legacy_dice = 0.0;
  double legacy_hd95 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t ignored = 0;
};

enum class Region : int { kEt = 0, kTc = 1, kWt = 2 };
inline constexpr std::array<Region, 3> kRegions{Region::kEt, Region::kTc, Region::kWt};
std::string_view region_name(Region r);

/// Scores for one subject, regions ordered (ET, TC, WT).
struct EvalReport {
  std::array<RegionReport, 3> regions;
  double mean_lesion_wise_dice = 0.0;
  double mean_lesion_wise_hd95 = 0.0;
  double mean_legacy_dice = 0.0;
  double mean_legacy_hd95 = 0.0;

  const RegionReport& operator[](Region r) const {
    return regions[static_cast<std::size_t>(r)];
  }
};

/// Whole-volume Dice and HD95. An empty side scores 0 Dice and the FN
/// (empty prediction) or FP (empty ground truth) penalty; both empty score
/// Dice 1 and HD95 0.
RegionReport legacy_scores(const BinaryMask& pred, const BinaryMask& gt,
                           const LesionMatchParams& params, const Spacing& spacing);

/// Evaluates every region of a labelled prediction against ground truth.
EvalReport evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                         const LesionMatchParams& params, const Spacing& spacing);

/// Same, using the ground truth's voxel spacing.
EvalReport evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                         const LesionMatchParams& params = {});

}  // namespace metrics
}  // namespace tumorseg
