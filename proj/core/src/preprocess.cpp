#include "tumorseg/preprocess.hpp"

#include <algorithm>
#include <string>

#include "tumorseg/errors.hpp"
#include "tumorseg/nifti.hpp"
#include "tumorseg/stats.hpp"

namespace tumorseg::preprocess {

BinaryMask brain_mask(const ScalarVolume& vol) {
  std::vector<std::uint8_t> m(vol.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = vol[i] != 0.0;
  return BinaryMask(vol.geometry(), std::move(m));
}

ScalarVolume zscore_normalize(const ScalarVolume& vol, const BinaryMask& mask) {
  const auto moments = masked_moments(vol, mask);
  if (moments.count < 2) {
    throw DegenerateInput("z-score needs at least two brain voxels, found " +
                          std::to_string(moments.count));
  }
  if (moments.stddev == 0.0) {
    throw DegenerateInput("z-score undefined: brain intensities are constant");
  }
  std::vector<double> out(vol.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out[i] = (vol[i] - moments.mean) / moments.stddev;
  }
  return ScalarVolume(vol.geometry(), std::move(out));
}

ScalarVolume rescale_percentile(const ScalarVolume& vol, const BinaryMask& mask, double p_low,
                                double p_high) {
  if (!(0.0 <= p_low && p_low < p_high && p_high <= 100.0)) {
    throw ConfigError("rescale needs 0 <= p_low < p_high <= 100");
  }
  auto values = masked_values(vol, mask);
  if (values.empty()) throw DegenerateInput("rescale over an empty brain mask");
  std::sort(values.begin(), values.end());
  const double lo = percentile_sorted(values, p_low);
  const double hi = percentile_sorted(values, p_high);
  if (!(lo < hi)) {
    throw DegenerateInput("rescale undefined: P" + std::to_string(p_low) + " equals P" +
                          std::to_string(p_high));
  }
  const double width = hi - lo;
  std::vector<double> out(vol.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out[i] = std::clamp((vol[i] - lo) / width, 0.0, 1.0);
  }
  return ScalarVolume(vol.geometry(), std::move(out));
}

namespace {

std::vector<double> quantile_anchors(std::vector<double> values, int n_quantiles) {
  std::sort(values.begin(), values.end());
  std::vector<double> anchors(static_cast<std::size_t>(n_quantiles));
  for (int k = 0; k < n_quantiles; ++k) {
    const double p = 100.0 * k / (n_quantiles - 1);
    anchors[static_cast<std::size_t>(k)] = percentile_sorted(values, p);
  }
  return anchors;
}

// Piecewise-linear map through (src_anchor[k], ref_anchor[k]). Where source
// anchors repeat, the last repeated anchor wins so the map stays monotone.
double map_through(double v, const std::vector<double>& src, const std::vector<double>& ref) {
  if (v <= src.front()) return ref.front();
  if (v >= src.back()) return ref.back();
  const auto upper = std::upper_bound(src.begin(), src.end(), v);
  const auto k = static_cast<std::size_t>(upper - src.begin()) - 1;
  const double t = (v - src[k]) / (src[k + 1] - src[k]);
  return ref[k] + t * (ref[k + 1] - ref[k]);
}

}  // namespace

ScalarVolume histogram_match(const ScalarVolume& src, const BinaryMask& src_mask,
                             const ScalarVolume& ref, const BinaryMask& ref_mask,
                             int n_quantiles) {
  if (n_quantiles < 2) throw ConfigError("histogram matching needs at least 2 quantiles");
  auto src_values = masked_values(src, src_mask);
  auto ref_values = masked_values(ref, ref_mask);
  if (src_values.empty() || ref_values.empty()) {
    throw DegenerateInput("histogram matching over an empty mask");
  }
  const auto src_anchors = quantile_anchors(std::move(src_values), n_quantiles);
  const auto ref_anchors = quantile_anchors(std::move(ref_values), n_quantiles);

  std::vector<double> out(src.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (src_mask[i]) out[i] = map_through(src[i], src_anchors, ref_anchors);
  }
  return ScalarVolume(src.geometry(), std::move(out));
}

void Plan::validate() const {
  for (const auto& step : steps) {
    if (const auto* r = std::get_if<Rescale>(&step)) {
      if (!(0.0 <= r->p_low && r->p_low < r->p_high && r->p_high <= 100.0)) {
        throw ConfigError("rescale needs 0 <= p_low < p_high <= 100");
      }
    } else if (const auto* h = std::get_if<HistogramMatch>(&step)) {
      if (h->n_quantiles < 2) throw ConfigError("histmatch needs n_quantiles >= 2");
      if (!h->reference_volume && h->reference.empty()) {
        throw ConfigError("histmatch needs a reference volume");
      }
    }
  }
}

Plan Plan::parse(std::string_view text, const std::filesystem::path& reference) {
  Plan plan;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view token = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token.empty()) continue;
    if (token == "zscore") {
      plan.steps.emplace_back(ZScore{});
    } else if (token == "rescale") {
      plan.steps.emplace_back(Rescale{});
    } else if (token == "histmatch") {
      plan.steps.emplace_back(HistogramMatch{reference, 256, std::nullopt});
    } else {
      throw ConfigError("unknown preprocessing step '" + std::string(token) +
                        "' (expected zscore, rescale, histmatch)");
    }
  }
  return plan;
}

ScalarVolume run_plan(const Plan& plan, const ScalarVolume& vol) {
  plan.validate();
  if (plan.steps.empty()) return vol;
  const BinaryMask mask = brain_mask(vol);
  ScalarVolume current = vol;
  for (const auto& step : plan.steps) {
    if (std::holds_alternative<ZScore>(step)) {
      current = zscore_normalize(current, mask);
    } else if (const auto* r = std::get_if<Rescale>(&step)) {
      current = rescale_percentile(current, mask, r->p_low, r->p_high);
    } else {
      const auto& h = std::get<HistogramMatch>(step);
      const ScalarVolume ref =
          h.reference_volume ? *h.reference_volume : nifti::read_scalar(h.reference);
      current = histogram_match(current, mask, ref, brain_mask(ref), h.n_quantiles);
    }
  }
  return current;
}

}  // namespace tumorseg::preprocess
