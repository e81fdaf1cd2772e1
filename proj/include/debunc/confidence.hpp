#pragma once

#include <span>
#include <vector>

#include "debunc/metrics.hpp"

namespace debunc::confidence {

/// Integer confidence level shown to other agents, 10 = most confident.
struct ConfidenceLevel {
  int value = 5;  // in [1, 10]
  int agent_id = 0;

  bool operator==(const ConfidenceLevel&) const = default;
};

/// Uncertainties below this are clamped before inversion; 1/u is undefined
/// at zero.
inline constexpr double kUncertaintyEpsilon = 1e-9;

/// Neutral level on the 1-10 scale: the scaling step fixes the pre-clamp
/// mean at exactly 5, so an uncommunicated confidence reads as 5.
inline constexpr int kNeutralConfidence = 5;

/// Pre-clamp scaled confidences s_i: raw confidences r_i = 1/u_i are scaled
/// so that their mean is exactly 5 for any input:
///   s_i = r_i / sum(r) * (5n - 1) + 1/n
/// Exposed separately so the mean-5 and scale-invariance properties can be
/// checked directly.
std::vector<double> scaled_confidences(std::span<const double> uncertainties);

/// Full mapping to integer levels: c_i = round(clamp(s_i, 1, 10)), rounding
/// half away from zero. Inputs are epsilon-clamped, so any positive finite
/// uncertainty list is accepted.
std::vector<ConfidenceLevel> map_confidences(std::span<const double> uncertainties);

/// Oracle rule: 10 when the agent was correct, 1 when incorrect. Throws
/// WrongMetricError when given scalar scores.
std::vector<ConfidenceLevel> oracle_confidences(
    std::span<const metrics::UncertaintyScore> flags);

}  // namespace debunc::confidence
