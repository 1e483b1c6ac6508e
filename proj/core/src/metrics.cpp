#include "tumorseg/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "tumorseg/components.hpp"
#include "tumorseg/distance.hpp"
#include "tumorseg/errors.hpp"
#include "tumorseg/morphology.hpp"

namespace tumorseg {

void LesionMatchParams::validate() const {
  if (dilation_iters < 0) throw ConfigError("dilation_iters must be non-negative");
  if (!(fp_hd95_penalty > 0.0) || !(fn_hd95_penalty > 0.0)) {
    throw ConfigError("HD95 penalties must be positive");
  }
}

namespace metrics {
namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

// True when some 26-neighbor of voxel (x, y, z) is background or off-grid.
bool touches_outside(const BinaryMask& mask, std::size_t x, std::size_t y, std::size_t z) {
  const GridShape& s = mask.shape();
  if (x == 0 || y == 0 || z == 0 || x + 1 == s.dx || y + 1 == s.dy || z + 1 == s.dz) return true;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!mask.at(x + dx, y + dy, z + dz)) return true;
      }
    }
  }
  return false;
}

// Dilation of one lesion restricted to its padded bounding box, written as
// `tag` into `footprint`.
void stamp_footprint(const Lesion& lesion, const GridShape& s, int iters, std::uint32_t tag,
                     std::vector<std::uint32_t>& footprint) {
  const auto r = static_cast<std::size_t>(iters);
  std::array<std::size_t, 3> lo{s.dx, s.dy, s.dz}, hi{0, 0, 0};
  for (std::size_t i : lesion.voxels) {
    const auto c = s.coords(i);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  const std::array<std::size_t, 3> ext{s.dx, s.dy, s.dz};
  for (int a = 0; a < 3; ++a) {
    lo[a] = lo[a] >= r ? lo[a] - r : 0;
    hi[a] = std::min(hi[a] + r, ext[a] - 1);
  }
  const GridShape box{hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  std::vector<std::uint8_t> local(box.voxels(), 0);
  for (std::size_t i : lesion.voxels) {
    const auto c = s.coords(i);
    local[box.index(c[0] - lo[0], c[1] - lo[1], c[2] - lo[2])] = 1;
  }
  const BinaryMask grown = dilate(BinaryMask(box, std::move(local)), iters);
  for (std::size_t z = 0; z < box.dz; ++z) {
    for (std::size_t y = 0; y < box.dy; ++y) {
      for (std::size_t x = 0; x < box.dx; ++x) {
        if (grown.at(x, y, z)) footprint[s.index(x + lo[0], y + lo[1], z + lo[2])] = tag;
      }
    }
  }
}

BinaryMask voxels_mask(const std::vector<const Lesion*>& lesions, const Geometry& g) {
  std::vector<std::uint8_t> m(g.shape.voxels(), 0);
  for (const Lesion* l : lesions) {
    for (std::size_t i : l->voxels) m[i] = 1;
  }
  return BinaryMask(g, std::move(m));
}

}  // namespace

std::string_view region_name(Region r) {
  switch (r) {
    case Region::kEt: return "ET";
    case Region::kTc: return "TC";
    case Region::kWt: return "WT";
  }
  return "?";
}

std::vector<Lesion> identify_lesions(const BinaryMask& mask, int dilation_iters) {
  if (dilation_iters < 0) throw ConfigError("dilation_iters must be non-negative");
  const GridShape& s = mask.shape();
  const ComponentLabeling cc = connected_components(mask, Connectivity::k26);
  if (cc.count == 0) return {};

  UnionFind groups(cc.count + 1);
  if (dilation_iters > 0) {
    // Two dilated components intersect iff some pair of their voxels is
    // within Chebyshev distance 2r. Such a pair can always be found among
    // voxels touching the outside, so only those stamp their cubes.
    const auto r = static_cast<long>(dilation_iters);
    std::vector<std::uint32_t> owner(s.voxels(), 0);
    const auto sx = static_cast<long>(s.dx), sy = static_cast<long>(s.dy);
    const auto sz = static_cast<long>(s.dz);
    for (std::size_t i = 0; i < s.voxels(); ++i) {
      const std::uint32_t id = cc.ids[i];
      if (id == 0) continue;
      const auto c = s.coords(i);
      if (!touches_outside(mask, c[0], c[1], c[2])) continue;
      const long x0 = static_cast<long>(c[0]), y0 = static_cast<long>(c[1]);
      const long z0 = static_cast<long>(c[2]);
      for (long z = std::max(0L, z0 - r); z <= std::min(sz - 1, z0 + r); ++z) {
        for (long y = std::max(0L, y0 - r); y <= std::min(sy - 1, y0 + r); ++y) {
          for (long x = std::max(0L, x0 - r); x <= std::min(sx - 1, x0 + r); ++x) {
            std::uint32_t& o = owner[s.index(x, y, z)];
            if (o == 0) {
              o = id;
            } else if (o != id) {
              groups.unite(o, id);
            }
          }
        }
      }
    }
  }

  // Roots are the smallest component id in each group, so ordering lesions
  // by root orders them by first voxel.
  std::map<std::uint32_t, std::size_t> slot;
  std::vector<Lesion> lesions;
  for (std::uint32_t id = 1; id <= cc.count; ++id) {
    const std::uint32_t root = groups.find(id);
    auto [it, inserted] = slot.try_emplace(root, lesions.size());
    if (inserted) lesions.emplace_back();
    lesions[it->second].component_ids.push_back(id);
  }
  for (std::size_t i = 0; i < s.voxels(); ++i) {
    if (cc.ids[i] != 0) lesions[slot[groups.find(cc.ids[i])]].voxels.push_back(i);
  }
  return lesions;
}

BinaryMask lesion_mask(const Lesion& lesion, const Geometry& geometry) {
  return voxels_mask({&lesion}, geometry);
}

double legacy_dice(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred.shape(), gt.shape(), "legacy_dice");
  std::size_t inter = 0, np = 0, ng = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    np += pred[i];
    ng += gt[i];
    inter += pred[i] & gt[i];
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

LesionScores lesion_wise_scores(const BinaryMask& pred, const BinaryMask& gt,
                                const LesionMatchParams& params, const Spacing& spacing) {
  require_same_shape(pred.shape(), gt.shape(), "lesion_wise_scores");
  params.validate();
  const GridShape& s = gt.shape();

  const auto gt_lesions = identify_lesions(gt, params.dilation_iters);
  const auto pred_lesions = identify_lesions(pred, params.dilation_iters);

  // Footprints of distinct ground-truth lesions are disjoint: overlapping
  // ones would have been grouped into one lesion.
  std::vector<std::uint32_t> footprint(s.voxels(), 0);
  for (std::size_t k = 0; k < gt_lesions.size(); ++k) {
    stamp_footprint(gt_lesions[k], s, params.dilation_iters, static_cast<std::uint32_t>(k + 1),
                    footprint);
  }
  std::vector<bool> scored(gt_lesions.size());
  LesionScores out;
  for (std::size_t k = 0; k < gt_lesions.size(); ++k) {
    scored[k] = gt_lesions[k].size() > params.gt_min_size;
    if (!scored[k]) ++out.ignored;
  }

  std::vector<std::vector<const Lesion*>> matches(gt_lesions.size());
  for (const Lesion& pl : pred_lesions) {
    std::size_t best = gt_lesions.size();
    bool near_ignored = false;
    for (std::size_t i : pl.voxels) {
      const std::uint32_t tag = footprint[i];
      if (tag == 0) continue;
      const std::size_t k = tag - 1;
      if (scored[k]) {
        best = std::min(best, k);
      } else {
        near_ignored = true;
      }
    }
    if (best < gt_lesions.size()) {
      matches[best].push_back(&pl);
    } else if (!near_ignored) {
      ++out.fp;
    }
  }

  double dice_sum = 0.0, hd_sum = 0.0;
  for (std::size_t k = 0; k < gt_lesions.size(); ++k) {
    if (!scored[k]) continue;
    if (matches[k].empty()) {
      ++out.fn;
      hd_sum += params.fn_hd95_penalty;
      continue;
    }
    ++out.tp;
    const BinaryMask p = voxels_mask(matches[k], gt.geometry());
    const BinaryMask g = lesion_mask(gt_lesions[k], gt.geometry());
    dice_sum += legacy_dice(p, g);
    hd_sum += hd95(p, g, spacing);
  }
  hd_sum += static_cast<double>(out.fp) * params.fp_hd95_penalty;

  const std::size_t denom = out.tp + out.fn + out.fp;
  if (denom == 0) {
    out.dice = 1.0;
    out.hd95 = 0.0;
  } else {
    out.dice = dice_sum / static_cast<double>(denom);
    out.hd95 = hd_sum / static_cast<double>(denom);
  }
  return out;
}

RegionReport legacy_scores(const BinaryMask& pred, const BinaryMask& gt,
                           const LesionMatchParams& params, const Spacing& spacing) {
  RegionReport r;
  r.legacy_dice = legacy_dice(pred, gt);
  const bool has_pred = pred.count() > 0, has_gt = gt.count() > 0;
  if (has_pred && has_gt) {
    r.legacy_hd95 = hd95(pred, gt, spacing);
  } else if (has_gt) {
    r.legacy_hd95 = params.fn_hd95_penalty;
  } else if (has_pred) {
    r.legacy_hd95 = params.fp_hd95_penalty;
  } else {
    r.legacy_hd95 = 0.0;
  }
  return r;
}

EvalReport evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                         const LesionMatchParams& params, const Spacing& spacing) {
  require_same_shape(pred.shape(), gt.shape(), "evaluate_case");
  params.validate();
  const RegionSet p = labels::to_regions(pred);
  const RegionSet g = labels::to_regions(gt);
  const std::array<const BinaryMask*, 3> pm{&p.et, &p.tc, &p.wt};
  const std::array<const BinaryMask*, 3> gm{&g.et, &g.tc, &g.wt};

  EvalReport report;
  for (std::size_t c = 0; c < 3; ++c) {
    RegionReport r = legacy_scores(*pm[c], *gm[c], params, spacing);
    const LesionScores ls = lesion_wise_scores(*pm[c], *gm[c], params, spacing);
    r.lesion_wise_dice = ls.dice;
    r.lesion_wise_hd95 = ls.hd95;
    r.tp = ls.tp;
    r.fp = ls.fp;
    r.fn = ls.fn;
    r.ignored = ls.ignored;
    report.regions[c] = r;
  }
  for (const auto& r : report.regions) {
    report.mean_lesion_wise_dice += r.lesion_wise_dice;
    report.mean_lesion_wise_hd95 += r.lesion_wise_hd95;
    report.mean_legacy_dice += r.legacy_dice;
    report.mean_legacy_hd95 += r.legacy_hd95;
  }
  report.mean_lesion_wise_dice /= 3.0;
  report.mean_lesion_wise_hd95 /= 3.0;
  report.mean_legacy_dice /= 3.0;
  report.mean_legacy_hd95 /= 3.0;
  return report;
}

EvalReport evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                         const LesionMatchParams& params) {
  return evaluate_case(pred, gt, params, gt.spacing());
}

}  // namespace metrics
}  // namespace tumorseg
