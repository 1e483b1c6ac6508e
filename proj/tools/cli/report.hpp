#pragma once

#include <string>
#include <vector>

#include "tumorseg/metrics.hpp"

namespace tumorseg::cli {

struct SubjectResult {
  std::string id;
  metrics::EvalReport report;
};

/// Column names, comma-separated, without a trailing newline.
///   subject,
///   {ET,TC,WT}_{lesion_dice,lesion_hd95,legacy_dice,legacy_hd95,tp,fp,fn,ignored},
///   mean_lesion_dice, mean_lesion_hd95, mean_legacy_dice, mean_legacy_hd95
std::string csv_header();

/// Header, one row per subject in the given order, then a row with subject
/// "mean" holding the column means. Reals print with six decimals.
std::string format_csv(const std::vector<SubjectResult>& results);

/// The same content as a JSON document.
std::string format_json(const std::vector<SubjectResult>& results);

}  // namespace tumorseg::cli
