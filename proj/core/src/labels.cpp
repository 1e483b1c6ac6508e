#include "tumorseg/labels.hpp"

#include <string>

#include "tumorseg/errors.hpp"

namespace tumorseg {

void RegionProbs::validate() const {
  require_same_shape(et.shape(), tc.shape(), "region probabilities");
  require_same_shape(et.shape(), wt.shape(), "region probabilities");
  for (const ScalarVolume* ch : {&et, &tc, &wt}) {
    for (double v : ch->data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError("region probability " + std::to_string(v) + " outside [0, 1]");
      }
    }
  }
}

void Thresholds::validate() const {
  for (double t : {wt, tc, et}) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ConfigError("threshold " + std::to_string(t) + " must lie in (0, 1)");
    }
  }
}

namespace labels {

RegionSet to_regions(const LabelVolume& lab) {
  const std::size_t n = lab.size();
  std::vector<std::uint8_t> et(n), tc(n), wt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t v = lab[i];
    et[i] = v == 3;
    tc[i] = v == 1 || v == 3;
    wt[i] = v != 0;
  }
  return {BinaryMask(lab.geometry(), std::move(et)), BinaryMask(lab.geometry(), std::move(tc)),
          BinaryMask(lab.geometry(), std::move(wt))};
}

void check_nesting(const RegionSet& rs) {
  require_same_shape(rs.et.shape(), rs.tc.shape(), "region set");
  require_same_shape(rs.et.shape(), rs.wt.shape(), "region set");
  for (std::size_t i = 0; i < rs.et.size(); ++i) {
    if ((rs.et[i] && !rs.tc[i]) || (rs.tc[i] && !rs.wt[i])) {
      throw RegionNestingError("regions violate ET ⊆ TC ⊆ WT at voxel " + std::to_string(i));
    }
  }
}

LabelVolume from_regions(const RegionSet& rs) {
  check_nesting(rs);
  std::vector<std::uint8_t> out(rs.et.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rs.et[i]) {
      out[i] = 3;
    } else if (rs.tc[i]) {
      out[i] = 1;
    } else if (rs.wt[i]) {
      out[i] = 2;
    } else {
      out[i] = 0;
    }
  }
  return LabelVolume(rs.wt.geometry(), std::move(out));
}

LabelVolume threshold_cascade(const RegionProbs& probs, const Thresholds& th) {
  require_same_shape(probs.et.shape(), probs.tc.shape(), "threshold cascade");
  require_same_shape(probs.et.shape(), probs.wt.shape(), "threshold cascade");
  th.validate();
  std::vector<std::uint8_t> out(probs.wt.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (probs.wt[i] < th.wt) {
      out[i] = 0;
    } else if (probs.tc[i] < th.tc) {
      out[i] = 2;
    } else if (probs.et[i] < th.et) {
      out[i] = 1;
    } else {
      out[i] = 3;
    }
  }
  return LabelVolume(probs.wt.geometry(), std::move(out));
}

}  // namespace labels
}  // namespace tumorseg
