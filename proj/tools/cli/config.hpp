#pragma once

#include <filesystem>
#include <string>

#include "tumorseg/labels.hpp"
#include "tumorseg/losses.hpp"
#include "tumorseg/metrics.hpp"
#include "tumorseg/postprocess.hpp"
#include "tumorseg/preprocess.hpp"

namespace tumorseg::cli {

/// Every tunable of the pipeline. Defaults match the library defaults.
struct PipelineConfig {
  std::string plan = "zscore,rescale";
  std::filesystem::path reference;
  double rescale_low = 2.0;
  double rescale_high = 98.0;
  int histmatch_quantiles = 256;

  Thresholds thresholds;
  PostprocessParams postprocess;
  LesionMatchParams lesion_match;

  /// Preset name, or empty when `loss_weights` is used.
  std::string loss_preset = "COMBO2";
  std::string loss_weights;
  double focal_gamma = losses::kDefaultFocalGamma;

  int jobs = 1;
  bool deterministic = true;

  /// Throws ConfigError when a nested parameter is out of range.
  void validate() const;

  /// The preprocessing plan with the configured step parameters. Throws
  /// ConfigError when histmatch is requested without a reference.
  preprocess::Plan build_plan() const;

  losses::CompoundLossSpec loss_spec() const;
};

/// Reads a JSON config. Missing keys keep their defaults; unknown keys,
/// wrong types and unreadable files throw ConfigError or IoError.
PipelineConfig load_config(const std::filesystem::path& path);

/// Parses JSON text into a config starting from `base`.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});

}  // namespace tumorseg::cli
