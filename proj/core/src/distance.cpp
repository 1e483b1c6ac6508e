#include "tumorseg/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tumorseg/errors.hpp"
#include "tumorseg/morphology.hpp"
#include "tumorseg/stats.hpp"

namespace tumorseg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along one line
// of `n` samples at positions k * step. Reads f[k * stride], writes d.
void edt_line(double* data, std::size_t n, std::size_t stride, double step,
              std::vector<double>& f, std::vector<double>& pos, std::vector<std::size_t>& v,
              std::vector<double>& z) {
  f.resize(n);
  pos.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = data[k * stride];
    pos[k] = step * static_cast<double>(k);
  }
  v.clear();
  z.clear();
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (!v.empty()) {
      const std::size_t p = v.back();
      const double s = ((f[q] + pos[q] * pos[q]) - (f[p] + pos[p] * pos[p])) /
                       (2.0 * (pos[q] - pos[p]));
      if (s <= z.back()) {
        v.pop_back();
        z.pop_back();
      } else {
        break;
      }
    }
    if (v.empty()) {
      v.push_back(q);
      z.push_back(-kInf);
    } else {
      const std::size_t p = v.back();
      z.push_back(((f[q] + pos[q] * pos[q]) - (f[p] + pos[p] * pos[p])) /
                  (2.0 * (pos[q] - pos[p])));
      v.push_back(q);
    }
  }
  if (v.empty()) return;  // whole line stays at infinity
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (j + 1 < v.size() && z[j + 1] < pos[q]) ++j;
    const double d = pos[q] - pos[v[j]];
    data[q * stride] = d * d + f[v[j]];
  }
}

struct Box {
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};  // inclusive
};

}  // namespace

std::vector<double> squared_distance_transform(const BinaryMask& features,
                                               const Spacing& spacing) {
  const GridShape& s = features.shape();
  std::vector<double> d(features.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = features[i] ? 0.0 : kInf;

  std::vector<double> f, pos, z;
  std::vector<std::size_t> v;
  for (std::size_t zz = 0; zz < s.dz; ++zz) {
    for (std::size_t y = 0; y < s.dy; ++y) {
      edt_line(&d[s.index(0, y, zz)], s.dx, 1, spacing[0], f, pos, v, z);
    }
  }
  for (std::size_t zz = 0; zz < s.dz; ++zz) {
    for (std::size_t x = 0; x < s.dx; ++x) {
      edt_line(&d[s.index(x, 0, zz)], s.dy, s.dx, spacing[1], f, pos, v, z);
    }
  }
  for (std::size_t y = 0; y < s.dy; ++y) {
    for (std::size_t x = 0; x < s.dx; ++x) {
      edt_line(&d[s.index(x, y, 0)], s.dz, s.dx * s.dy, spacing[2], f, pos, v, z);
    }
  }
  return d;
}

std::vector<double> directed_boundary_distances(const BinaryMask& from, const BinaryMask& to,
                                                const Spacing& spacing) {
  require_same_shape(from.shape(), to.shape(), "boundary distances");
  const GridShape& s = from.shape();

  // Crop to the joint bounding box; every nearest boundary voxel lies inside.
  Box box{{s.dx, s.dy, s.dz}, {0, 0, 0}};
  bool any = false;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!from[i] && !to[i]) continue;
    any = true;
    const auto c = s.coords(i);
    for (int a = 0; a < 3; ++a) {
      box.lo[a] = std::min(box.lo[a], c[a]);
      box.hi[a] = std::max(box.hi[a], c[a]);
    }
  }
  if (!any) return {};

  const BinaryMask from_edge = boundary(from);
  const BinaryMask to_edge = boundary(to);

  const GridShape cs{box.hi[0] - box.lo[0] + 1, box.hi[1] - box.lo[1] + 1,
                     box.hi[2] - box.lo[2] + 1};
  std::vector<std::uint8_t> crop(cs.voxels());
  for (std::size_t z = 0; z < cs.dz; ++z) {
    for (std::size_t y = 0; y < cs.dy; ++y) {
      for (std::size_t x = 0; x < cs.dx; ++x) {
        crop[cs.index(x, y, z)] = to_edge[s.index(x + box.lo[0], y + box.lo[1], z + box.lo[2])];
      }
    }
  }
  const auto sq = squared_distance_transform(BinaryMask(cs, std::move(crop)), spacing);

  std::vector<double> out;
  for (std::size_t z = 0; z < cs.dz; ++z) {
    for (std::size_t y = 0; y < cs.dy; ++y) {
      for (std::size_t x = 0; x < cs.dx; ++x) {
        if (from_edge[s.index(x + box.lo[0], y + box.lo[1], z + box.lo[2])]) {
          out.push_back(std::sqrt(sq[cs.index(x, y, z)]));
        }
      }
    }
  }
  return out;
}

double hd95(const BinaryMask& pred, const BinaryMask& gt, const Spacing& spacing) {
  require_same_shape(pred.shape(), gt.shape(), "hd95");
  if (pred.count() == 0 || gt.count() == 0) {
    throw EmptyMaskError("hd95 is undefined when a mask is empty");
  }
  auto forward = directed_boundary_distances(pred, gt, spacing);
  auto backward = directed_boundary_distances(gt, pred, spacing);
  std::sort(forward.begin(), forward.end());
  std::sort(backward.begin(), backward.end());
  return std::max(percentile_sorted(forward, 95.0), percentile_sorted(backward, 95.0));
}

}  // namespace tumorseg
