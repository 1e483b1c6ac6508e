#include "tumorseg/losses.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include "tumorseg/errors.hpp"

namespace tumorseg::losses {
namespace {

double clamp_prob(double p) { return std::clamp(p, kClampEps, 1.0 - kClampEps); }
bool clamp_active(double p) { return p < kClampEps || p > 1.0 - kClampEps; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

LossValue single(double value, const Geometry& g, std::vector<double> grad) {
  LossValue out;
  out.value = value;
  out.gradient.emplace_back(g, std::move(grad));
  return out;
}

// Per-axis central differences with replicate borders, plus magnitude.
struct EdgeField {
  std::vector<double> gx, gy, gz, mag;
  std::size_t argmax = 0;  // first index of the maximum magnitude
  double max = 0.0;
};

EdgeField edge_field(std::span<const double> v, const GridShape& s) {
  EdgeField f;
  const std::size_t n = s.voxels();
  f.gx.resize(n);
  f.gy.resize(n);
  f.gz.resize(n);
  f.mag.resize(n);
  for (std::size_t z = 0; z < s.dz; ++z) {
    const std::size_t zm = z > 0 ? z - 1 : 0, zp = std::min(z + 1, s.dz - 1);
    for (std::size_t y = 0; y < s.dy; ++y) {
      const std::size_t ym = y > 0 ? y - 1 : 0, yp = std::min(y + 1, s.dy - 1);
      for (std::size_t x = 0; x < s.dx; ++x) {
        const std::size_t xm = x > 0 ? x - 1 : 0, xp = std::min(x + 1, s.dx - 1);
        const std::size_t i = s.index(x, y, z);
        const double gx = 0.5 * (v[s.index(xp, y, z)] - v[s.index(xm, y, z)]);
        const double gy = 0.5 * (v[s.index(x, yp, z)] - v[s.index(x, ym, z)]);
        const double gz = 0.5 * (v[s.index(x, y, zp)] - v[s.index(x, y, zm)]);
        f.gx[i] = gx;
        f.gy[i] = gy;
        f.gz[i] = gz;
        f.mag[i] = std::sqrt(gx * gx + gy * gy + gz * gz);
        if (f.mag[i] > f.max) {
          f.max = f.mag[i];
          f.argmax = i;
        }
      }
    }
  }
  return f;
}

std::vector<double> normalized(const EdgeField& f) {
  std::vector<double> out(f.mag.size(), 0.0);
  if (f.max == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.mag[i] / f.max;
  return out;
}

}  // namespace

std::string_view name(LossKind kind) {
  switch (kind) {
    case LossKind::kMse: return "mse";
    case LossKind::kCe: return "ce";
    case LossKind::kDice: return "dice";
    case LossKind::kFocal: return "focal";
    case LossKind::kEdge: return "edge";
  }
  return "?";
}

LossKind parse_kind(std::string_view text) {
  const std::string k = lower(text);
  if (k == "mse") return LossKind::kMse;
  if (k == "ce") return LossKind::kCe;
  if (k == "dice") return LossKind::kDice;
  if (k == "focal") return LossKind::kFocal;
  if (k == "edge") return LossKind::kEdge;
  throw ConfigError("unknown loss '" + std::string(text) + "'");
}

LossValue mse_loss(const ScalarVolume& pred, const BinaryMask& target) {
  require_same_shape(pred.shape(), target.shape(), "mse_loss");
  const std::size_t n = pred.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - (target[i] ? 1.0 : 0.0);
    sum += d * d;
    grad[i] = 2.0 * inv_n * d;
  }
  return single(sum * inv_n, pred.geometry(), std::move(grad));
}

LossValue ce_loss(const ScalarVolume& pred, const BinaryMask& target) {
  require_same_shape(pred.shape(), target.shape(), "ce_loss");
  const std::size_t n = pred.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clamp_prob(pred[i]);
    const double t = target[i] ? 1.0 : 0.0;
    sum += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    if (!clamp_active(pred[i])) grad[i] = -inv_n * (t / p - (1.0 - t) / (1.0 - p));
  }
  return single(-sum * inv_n, pred.geometry(), std::move(grad));
}

LossValue dice_loss(const ScalarVolume& pred, const BinaryMask& target) {
  require_same_shape(pred.shape(), target.shape(), "dice_loss");
  const std::size_t n = pred.size();
  double inter = 0.0, sum_p = 0.0, sum_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = target[i] ? 1.0 : 0.0;
    inter += pred[i] * t;
    sum_p += pred[i];
    sum_t += t;
  }
  const double num = 2.0 * inter + kDiceSmooth;
  const double den = sum_p + sum_t + kDiceSmooth;
  std::vector<double> grad(n);
  const double inv_den2 = 1.0 / (den * den);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = target[i] ? 1.0 : 0.0;
    grad[i] = -(2.0 * t * den - num) * inv_den2;
  }
  return single(1.0 - num / den, pred.geometry(), std::move(grad));
}

LossValue focal_loss(const ScalarVolume& pred, const BinaryMask& target, double gamma) {
  require_same_shape(pred.shape(), target.shape(), "focal_loss");
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be non-negative");
  const std::size_t n = pred.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clamp_prob(pred[i]);
    const double t = target[i] ? 1.0 : 0.0;
    const double q = 1.0 - p;
    const double wq = std::pow(q, gamma);  // (1-p)^γ
    const double wp = std::pow(p, gamma);  // p^γ
    const double lp = std::log(p), lq = std::log(q);
    sum += t * wq * lp + (1.0 - t) * wp * lq;
    if (!clamp_active(pred[i])) {
      // d/dp of t (1-p)^γ ln p + (1-t) p^γ ln(1-p)
      const double d_pos = gamma == 0.0 ? 1.0 / p : -gamma * std::pow(q, gamma - 1.0) * lp + wq / p;
      const double d_neg = gamma == 0.0 ? -1.0 / q : gamma * std::pow(p, gamma - 1.0) * lq - wp / q;
      grad[i] = -inv_n * (t * d_pos + (1.0 - t) * d_neg);
    }
  }
  return single(-sum * inv_n, pred.geometry(), std::move(grad));
}

ScalarVolume edge_map(const ScalarVolume& vol) {
  return ScalarVolume(vol.geometry(), normalized(edge_field(vol.data(), vol.shape())));
}

LossValue edge_loss(const ScalarVolume& pred, const BinaryMask& target) {
  require_same_shape(pred.shape(), target.shape(), "edge_loss");
  const GridShape& s = pred.shape();
  const std::size_t n = s.voxels();
  const double inv_n = 1.0 / static_cast<double>(n);

  const EdgeField fp = edge_field(pred.data(), s);
  const ScalarVolume target_scalar = to_scalar(target);
  const auto et = normalized(edge_field(target_scalar.data(), s));
  const auto ep = normalized(fp);

  double sum = 0.0;
  std::vector<double> d_edge(n);  // dL/de_i
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ep[i] - et[i];
    sum += d * d;
    d_edge[i] = 2.0 * inv_n * d;
  }

  std::vector<double> grad(n, 0.0);
  if (fp.max > 0.0) {
    // e_i = g_i / g_m with m the (first) argmax. Quotient rule gives
    // dL/dg_j = a_j / g_m - [j == m] Σ_i a_i g_i / g_m^2.
    double coupling = 0.0;
    for (std::size_t i = 0; i < n; ++i) coupling += d_edge[i] * fp.mag[i];
    const double inv_max = 1.0 / fp.max;
    for (std::size_t z = 0; z < s.dz; ++z) {
      const std::size_t zm = z > 0 ? z - 1 : 0, zp = std::min(z + 1, s.dz - 1);
      for (std::size_t y = 0; y < s.dy; ++y) {
        const std::size_t ym = y > 0 ? y - 1 : 0, yp = std::min(y + 1, s.dy - 1);
        for (std::size_t x = 0; x < s.dx; ++x) {
          const std::size_t i = s.index(x, y, z);
          if (fp.mag[i] == 0.0) continue;  // sqrt kink: zero subgradient
          double d_mag = d_edge[i] * inv_max;
          if (i == fp.argmax) d_mag -= coupling * inv_max * inv_max;
          const double scale = 0.5 * d_mag / fp.mag[i];
          const double bx = scale * fp.gx[i], by = scale * fp.gy[i], bz = scale * fp.gz[i];
          const std::size_t xm = x > 0 ? x - 1 : 0, xp = std::min(x + 1, s.dx - 1);
          grad[s.index(xp, y, z)] += bx;
          grad[s.index(xm, y, z)] -= bx;
          grad[s.index(x, yp, z)] += by;
          grad[s.index(x, ym, z)] -= by;
          grad[s.index(x, y, zp)] += bz;
          grad[s.index(x, y, zm)] -= bz;
        }
      }
    }
  }
  return single(sum * inv_n, pred.geometry(), std::move(grad));
}

LossValue loss(LossKind kind, const ScalarVolume& pred, const BinaryMask& target,
               double focal_gamma) {
  switch (kind) {
    case LossKind::kMse: return mse_loss(pred, target);
    case LossKind::kCe: return ce_loss(pred, target);
    case LossKind::kDice: return dice_loss(pred, target);
    case LossKind::kFocal: return focal_loss(pred, target, focal_gamma);
    case LossKind::kEdge: return edge_loss(pred, target);
  }
  throw ConfigError("unknown loss kind");
}

LossValue channel_averaged(LossKind kind, const RegionProbs& probs, const RegionSet& gt,
                           double focal_gamma) {
  const std::array<const ScalarVolume*, 3> preds{&probs.et, &probs.tc, &probs.wt};
  const std::array<const BinaryMask*, 3> targets{&gt.et, &gt.tc, &gt.wt};
  std::array<LossValue, 3> per;
  for (std::size_t c = 0; c < 3; ++c) per[c] = loss(kind, *preds[c], *targets[c], focal_gamma);

  LossValue out;
  out.value = (per[0].value + per[1].value + per[2].value) / 3.0;
  for (auto& lv : per) {
    auto g = std::move(lv.gradient.front());
    const Geometry geom = g.geometry();
    auto buf = std::move(g).release();
    for (auto& v : buf) v /= 3.0;
    out.gradient.emplace_back(geom, std::move(buf));
  }
  return out;
}

void CompoundLossSpec::validate() const {
  if (terms.empty()) throw ConfigError("compound loss has no terms");
  bool any = false;
  for (const auto& t : terms) {
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
      throw ConfigError("loss weights must be finite and non-negative");
    }
    any = any || t.weight > 0.0;
  }
  if (!any) throw ConfigError("compound loss needs at least one nonzero weight");
  if (!(focal_gamma >= 0.0)) throw ConfigError("focal gamma must be non-negative");
}

CompoundLossSpec CompoundLossSpec::combo1() {
  return {{{LossKind::kMse, 0.25}, {LossKind::kCe, 0.0044}, {LossKind::kEdge, 0.00015}}};
}

CompoundLossSpec CompoundLossSpec::combo2() {
  return {{{LossKind::kDice, 1.0}, {LossKind::kFocal, 1.0}, {LossKind::kEdge, 0.05}}};
}

CompoundLossSpec CompoundLossSpec::combo3() {
  return {{{LossKind::kDice, 1.0}, {LossKind::kFocal, 1.0}, {LossKind::kEdge, 0.005}}};
}

CompoundLossSpec CompoundLossSpec::preset(std::string_view preset_name) {
  const std::string k = lower(preset_name);
  if (k == "combo1") return combo1();
  if (k == "combo2") return combo2();
  if (k == "combo3") return combo3();
  throw ConfigError("unknown loss preset '" + std::string(preset_name) +
                    "' (expected COMBO1, COMBO2, COMBO3)");
}

CompoundLossSpec CompoundLossSpec::parse(std::string_view text) {
  CompoundLossSpec spec;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("loss weight '" + std::string(item) + "' is not of the form kind=weight");
    }
    const std::string weight_text(item.substr(eq + 1));
    std::size_t used = 0;
    double w = 0.0;
    try {
      w = std::stod(weight_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != weight_text.size()) {
      throw ConfigError("bad loss weight '" + weight_text + "'");
    }
    spec.terms.push_back({parse_kind(item.substr(0, eq)), w});
  }
  spec.validate();
  return spec;
}

LossValue compound_loss(const CompoundLossSpec& spec, const RegionProbs& probs,
                        const RegionSet& gt) {
  spec.validate();
  const std::size_t n = probs.wt.size();
  LossValue out;
  std::array<std::vector<double>, 3> grads;
  for (auto& g : grads) g.assign(n, 0.0);
  for (const auto& term : spec.terms) {
    if (term.weight == 0.0) continue;
    const LossValue part = channel_averaged(term.kind, probs, gt, spec.focal_gamma);
    out.value += term.weight * part.value;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto src = part.gradient[c].data();
      for (std::size_t i = 0; i < n; ++i) grads[c][i] += term.weight * src[i];
    }
  }
  const std::array<const ScalarVolume*, 3> preds{&probs.et, &probs.tc, &probs.wt};
  for (std::size_t c = 0; c < 3; ++c) out.gradient.emplace_back(preds[c]->geometry(), std::move(grads[c]));
  return out;
}

}  // namespace tumorseg::losses
