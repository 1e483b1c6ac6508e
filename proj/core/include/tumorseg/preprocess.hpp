#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg::preprocess {

/// Nonzero voxels of a skull-stripped scan.
BinaryMask brain_mask(const ScalarVolume& vol);

/// (v - mean) / std over masked voxels, population std; background set to 0.
/// Throws DegenerateInput for fewer than two masked voxels or zero spread.
ScalarVolume zscore_normalize(const ScalarVolume& vol, const BinaryMask& mask);

/// Affine map sending the masked [P_low, P_high] percentile range onto
/// [0, 1], clamping outside it. Background stays 0.
ScalarVolume rescale_percentile(const ScalarVolume& vol, const BinaryMask& mask,
                                double p_low = 2.0, double p_high = 98.0);

/// Quantile mapping of the masked source intensities onto the masked
/// reference distribution, using `n_quantiles` evenly spaced anchors and
/// linear interpolation between them. Background stays 0.
ScalarVolume histogram_match(const ScalarVolume& src, const BinaryMask& src_mask,
                             const ScalarVolume& ref, const BinaryMask& ref_mask,
                             int n_quantiles = 256);

struct ZScore {};

struct Rescale {
  double p_low = 2.0;
  double p_high = 98.0;
};

struct HistogramMatch {
  std::filesystem::path reference;
  int n_quantiles = 256;
  /// Preloaded reference; when empty the file at `reference` is read.
  std::optional<ScalarVolume> reference_volume;
};

using Step = std::variant<ZScore, Rescale, HistogramMatch>;

/// Ordered list of transforms applied by run_plan.
struct Plan {
  std::vector<Step> steps;

  /// Throws ConfigError on an invalid step parameter.
  void validate() const;

  /// Parses a comma-separated list such as "zscore,rescale,histmatch".
  /// Empty text gives an empty plan. Rescale and histmatch parameters take
  /// their defaults; `reference` fills every histmatch step.
  static Plan parse(std::string_view text, const std::filesystem::path& reference = {});
};

/// Applies the steps in order. The brain mask is computed once from the
/// raw input and reused by every step.
ScalarVolume run_plan(const Plan& plan, const ScalarVolume& vol);

}  // namespace tumorseg::preprocess
