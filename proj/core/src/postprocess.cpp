#include "tumorseg/postprocess.hpp"

#include "tumorseg/errors.hpp"
#include "tumorseg/labels.hpp"
#include "tumorseg/metrics.hpp"

namespace tumorseg::postprocess {
namespace {

BinaryMask invert(const BinaryMask& m) {
  std::vector<std::uint8_t> out(m.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = !m[i];
  return BinaryMask(m.geometry(), std::move(out));
}

BinaryMask hole_voxels(const BinaryMask& region, const PostprocessParams& params) {
  const ComponentLabeling holes = find_holes(region, params);
  std::vector<std::uint8_t> out(region.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = holes.ids[i] != 0;
  return BinaryMask(region.geometry(), std::move(out));
}

enum class Which { kEt, kTc, kWt };

BinaryMask region_of(const std::vector<std::uint8_t>& lab, const Geometry& g, Which w) {
  std::vector<std::uint8_t> out(lab.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t v = lab[i];
    switch (w) {
      case Which::kEt: out[i] = v == 3; break;
      case Which::kTc: out[i] = v == 1 || v == 3; break;
      case Which::kWt: out[i] = v != 0; break;
    }
  }
  return BinaryMask(g, std::move(out));
}

// Sets removed dust voxels of region `w` to background; returns the voxels
// that were removed.
BinaryMask strip_dust(std::vector<std::uint8_t>& lab, const Geometry& g, Which w,
                      const PostprocessParams& params) {
  const BinaryMask region = region_of(lab, g, w);
  const BinaryMask kept = remove_dust(region, params);
  const BinaryMask removed = difference(region, kept);
  for (std::size_t i = 0; i < lab.size(); ++i) {
    if (removed[i]) lab[i] = 0;
  }
  return removed;
}

// Fills voxels that are holes of region `w` now but were not before, with
// `fill`.
void fill_new_holes(std::vector<std::uint8_t>& lab, const Geometry& g, Which w,
                    const BinaryMask& holes_before, std::uint8_t fill,
                    const PostprocessParams& params) {
  const BinaryMask holes_after = hole_voxels(region_of(lab, g, w), params);
  for (std::size_t i = 0; i < lab.size(); ++i) {
    if (holes_after[i] && !holes_before[i]) lab[i] = fill;
  }
}

}  // namespace

BinaryMask remove_dust(const BinaryMask& mask, const PostprocessParams& params) {
  const ComponentLabeling cc = connected_components(mask, params.foreground_connectivity);
  std::vector<bool> keep(cc.count + 1, false);
  for (std::uint32_t id = 1; id <= cc.count; ++id) keep[id] = cc.sizes[id - 1] > params.dust_max;
  return cc.select(keep);
}

ComponentLabeling find_holes(const BinaryMask& mask, const PostprocessParams& params) {
  const GridShape& s = mask.shape();
  const ComponentLabeling bg = connected_components(invert(mask), params.hole_background_connectivity);

  std::vector<bool> touches(bg.count + 1, false);
  for (std::size_t z = 0; z < s.dz; ++z) {
    for (std::size_t y = 0; y < s.dy; ++y) {
      for (std::size_t x = 0; x < s.dx; ++x) {
        const bool face = x == 0 || y == 0 || z == 0 || x + 1 == s.dx || y + 1 == s.dy ||
                          z + 1 == s.dz;
        if (!face) continue;
        touches[bg.ids[s.index(x, y, z)]] = true;
      }
    }
  }

  ComponentLabeling holes;
  holes.geometry = mask.geometry();
  holes.ids.assign(s.voxels(), 0);
  std::vector<std::uint32_t> renumber(bg.count + 1, 0);
  for (std::uint32_t id = 1; id <= bg.count; ++id) {
    if (!touches[id]) {
      renumber[id] = ++holes.count;
      holes.sizes.push_back(bg.sizes[id - 1]);
    }
  }
  for (std::size_t i = 0; i < s.voxels(); ++i) holes.ids[i] = renumber[bg.ids[i]];
  return holes;
}

LabelVolume postprocess_prediction(const LabelVolume& lab, const PostprocessParams& params) {
  const Geometry& g = lab.geometry();
  std::vector<std::uint8_t> out(lab.data().begin(), lab.data().end());

  const BinaryMask tc_holes_before = hole_voxels(region_of(out, g, Which::kTc), params);
  strip_dust(out, g, Which::kEt, params);
  fill_new_holes(out, g, Which::kTc, tc_holes_before, 1, params);

  const BinaryMask wt_holes_before = hole_voxels(region_of(out, g, Which::kWt), params);
  strip_dust(out, g, Which::kTc, params);
  fill_new_holes(out, g, Which::kWt, wt_holes_before, 2, params);

  strip_dust(out, g, Which::kWt, params);
  return LabelVolume(g, std::move(out));
}

LabelVolume clean_ground_truth(const LabelVolume& lab, const PostprocessParams& params,
                               int dilation_iters) {
  if (dilation_iters < 0) throw ConfigError("dilation_iters must be non-negative");
  const RegionSet regions = labels::to_regions(lab);
  auto clean = [&](const BinaryMask& m) {
    std::vector<std::uint8_t> out(m.size(), 0);
    for (const Lesion& l : metrics::identify_lesions(m, dilation_iters)) {
      if (l.size() <= params.dust_max) continue;
      for (std::size_t i : l.voxels) out[i] = 1;
    }
    return BinaryMask(m.geometry(), std::move(out));
  };
  const BinaryMask wt = clean(regions.wt);
  const BinaryMask tc = clean(regions.tc) & wt;
  const BinaryMask et = clean(regions.et) & tc;
  return labels::from_regions({et, tc, wt});
}

}  // namespace tumorseg::postprocess
