#include "tumorseg/morphology.hpp"

#include <algorithm>

#include "tumorseg/errors.hpp"

namespace tumorseg {
namespace {

// One axis of the separable cube dilation: out(i) = max over |k| <= r of
// in(i + k * stride) along that axis.
void dilate_axis(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out,
                 const GridShape& s, int axis, std::size_t r) {
  const std::size_t len = axis == 0 ? s.dx : axis == 1 ? s.dy : s.dz;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? s.dx : s.dx * s.dy;
  std::fill(out.begin(), out.end(), 0);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!in[i]) continue;
    const std::size_t pos = (i / stride) % len;
    const std::size_t lo = pos >= r ? pos - r : 0;
    const std::size_t hi = std::min(pos + r, len - 1);
    const std::size_t base = i - pos * stride;
    for (std::size_t p = lo; p <= hi; ++p) out[base + p * stride] = 1;
  }
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int iters) {
  if (iters < 0) throw ConfigError("dilation iterations must be non-negative");
  if (iters == 0) return mask;
  const auto r = static_cast<std::size_t>(iters);
  std::vector<std::uint8_t> a(mask.data().begin(), mask.data().end());
  std::vector<std::uint8_t> b(a.size());
  dilate_axis(a, b, mask.shape(), 0, r);
  dilate_axis(b, a, mask.shape(), 1, r);
  dilate_axis(a, b, mask.shape(), 2, r);
  return BinaryMask(mask.geometry(), std::move(b));
}

BinaryMask boundary(const BinaryMask& mask) {
  const GridShape& s = mask.shape();
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (std::size_t z = 0; z < s.dz; ++z) {
    for (std::size_t y = 0; y < s.dy; ++y) {
      for (std::size_t x = 0; x < s.dx; ++x) {
        const std::size_t i = s.index(x, y, z);
        if (!mask[i]) continue;
        const bool edge = x == 0 || y == 0 || z == 0 || x + 1 == s.dx || y + 1 == s.dy ||
                          z + 1 == s.dz;
        out[i] = edge || !mask[i - 1] || !mask[i + 1] || !mask[i - s.dx] ||
                 !mask[i + s.dx] || !mask[i - s.dx * s.dy] || !mask[i + s.dx * s.dy];
      }
    }
  }
  return BinaryMask(mask.geometry(), std::move(out));
}

}  // namespace tumorseg
