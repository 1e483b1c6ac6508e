#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;
  double skip_rate() const {
    const int total = checked + skipped;
    return total == 0 ? 0.0 : static_cast<double>(skipped) / total;
  }
};

/// |a - n| / max(|a|, |n|); pairs whose magnitudes are both below 1e-12
/// count as agreeing when their difference is below 1e-12.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  if (scale < 1e-12) return diff < 1e-12 ? 0.0 : 1.0;
  return diff / scale;
}

/// Central differences f(x + h e_i) - f(x - h e_i) / 2h at `coords`.
/// `skip(i, x_plus, x_minus)` flags coordinates where the loss is not
/// differentiable inside the stencil.
inline GradCheckResult check_gradient(
    std::vector<double> x, const std::vector<double>& analytic,
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<std::size_t>& coords, double h,
    const std::function<bool(std::size_t, const std::vector<double>&,
                             const std::vector<double>&)>& skip = {}) {
  GradCheckResult r;
  for (std::size_t i : coords) {
    const double orig = x[i];
    x[i] = orig + h;
    const std::vector<double> plus = x;
    const double fp = f(x);
    x[i] = orig - h;
    const std::vector<double> minus = x;
    const double fm = f(x);
    x[i] = orig;
    if (skip && skip(i, plus, minus)) {
      ++r.skipped;
      continue;
    }
    const double numeric = (fp - fm) / (2.0 * h);
    r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic[i], numeric));
    ++r.checked;
  }
  return r;
}

inline std::vector<std::size_t> random_coords(std::size_t n, std::size_t count,
                                              std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  std::vector<std::size_t> out(count);
  for (auto& c : out) c = d(rng);
  return out;
}

/// Index of the first maximum of the central-difference gradient magnitude
/// (replicate borders), computed independently of the library.
inline std::size_t edge_argmax(const std::vector<double>& v, const GridShape& s) {
  auto at = [&](long x, long y, long z) {
    x = std::clamp<long>(x, 0, static_cast<long>(s.dx) - 1);
    y = std::clamp<long>(y, 0, static_cast<long>(s.dy) - 1);
    z = std::clamp<long>(z, 0, static_cast<long>(s.dz) - 1);
    return v[s.index(x, y, z)];
  };
  double best = -1.0;
  std::size_t arg = 0;
  for (long z = 0; z < static_cast<long>(s.dz); ++z)
    for (long y = 0; y < static_cast<long>(s.dy); ++y)
      for (long x = 0; x < static_cast<long>(s.dx); ++x) {
        const double gx = (at(x + 1, y, z) - at(x - 1, y, z)) / 2;
        const double gy = (at(x, y + 1, z) - at(x, y - 1, z)) / 2;
        const double gz = (at(x, y, z + 1) - at(x, y, z - 1)) / 2;
        const double g = std::sqrt(gx * gx + gy * gy + gz * gz);
        if (g > best) {
          best = g;
          arg = s.index(x, y, z);
        }
      }
  return arg;
}

}  // namespace tumorseg::testing
