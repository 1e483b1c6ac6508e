#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tumorseg/labels.hpp"
#include "tumorseg/volume.hpp"

namespace tumorseg::losses {

/// Log arguments are clamped to [kClampEps, 1 - kClampEps].
inline constexpr double kClampEps = 1e-7;
/// Added to the Dice numerator and denominator.
inline constexpr double kDiceSmooth = 1e-5;
inline constexpr double kDefaultFocalGamma = 2.0;

/// A loss value and its gradient with respect to each prediction channel.
struct LossValue {
  double value = 0.0;
  std::vector<ScalarVolume> gradient;
};

enum class LossKind { kMse, kCe, kDice, kFocal, kEdge };

std::string_view name(LossKind kind);
/// Accepts "mse", "ce", "dice", "focal", "edge" (case-insensitive).
LossKind parse_kind(std::string_view text);

// Single-channel losses. `pred` holds probabilities in [0, 1]; every
// function throws ShapeError when the shapes differ. Sums run in storage
// order, so results are reproducible bit for bit.

/// (1/N) Σ (p - t)^2.
LossValue mse_loss(const ScalarVolume& pred, const BinaryMask& target);

/// Binary cross-entropy averaged over voxels. The gradient is zero where
/// the clamp is active.
LossValue ce_loss(const ScalarVolume& pred, const BinaryMask& target);

/// 1 - (2 Σ p t + s) / (Σ p + Σ t + s).
LossValue dice_loss(const ScalarVolume& pred, const BinaryMask& target);

/// Focal loss; gamma = 0 reproduces ce_loss.
LossValue focal_loss(const ScalarVolume& pred, const BinaryMask& target,
                     double gamma = kDefaultFocalGamma);

/// Central-difference gradient magnitude (replicate borders), divided by
/// its global maximum. A constant volume maps to all zeros.
ScalarVolume edge_map(const ScalarVolume& vol);

/// MSE between edge_map(pred) and edge_map(target).
LossValue edge_loss(const ScalarVolume& pred, const BinaryMask& target);

/// Dispatches one of the five losses by kind.
LossValue loss(LossKind kind, const ScalarVolume& pred, const BinaryMask& target,
               double focal_gamma = kDefaultFocalGamma);

/// Mean of the per-channel losses over (ET, TC, WT). The gradient carries
/// three volumes, each the channel's gradient divided by three.
LossValue channel_averaged(LossKind kind, const RegionProbs& probs, const RegionSet& gt,
                           double focal_gamma = kDefaultFocalGamma);

/// Weighted sum of channel-averaged losses.
struct CompoundLossSpec {
  struct Term {
    LossKind kind;
    double weight;
  };
  std::vector<Term> terms;
  double focal_gamma = kDefaultFocalGamma;

  /// Throws ConfigError for negative weights or when every weight is zero.
  void validate() const;

  /// MSE 0.25 + CE 0.0044 + Edge 0.00015.
  static CompoundLossSpec combo1();
  /// Dice 1 + Focal 1 + Edge 0.05.
  static CompoundLossSpec combo2();
  /// Dice 1 + Focal 1 + Edge 0.005.
  static CompoundLossSpec combo3();
  /// "COMBO1" / "COMBO2" / "COMBO3" (case-insensitive).
  static CompoundLossSpec preset(std::string_view name);
  /// Explicit weights, e.g. "dice=1,focal=1,edge=0.05".
  static CompoundLossSpec parse(std::string_view text);
};

LossValue compound_loss(const CompoundLossSpec& spec, const RegionProbs& probs,
                        const RegionSet& gt);

}  // namespace tumorseg::losses
