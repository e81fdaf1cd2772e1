#include "debunc/confidence.hpp"

#include <algorithm>
#include <cmath>

#include "debunc/errors.hpp"

namespace debunc::confidence {

std::vector<double> scaled_confidences(std::span<const double> uncertainties) {
  if (uncertainties.empty()) throw EmptyInputError("scaled_confidences: no uncertainties");
  const auto n = static_cast<double>(uncertainties.size());
  std::vector<double> raw(uncertainties.size());
  double total = 0.0;
  for (std::size_t i = 0; i < uncertainties.size(); ++i) {
    const double u = uncertainties[i];
    if (!std::isfinite(u) || u < 0.0) {
      throw PreconditionError("uncertainties must be finite and >= 0");
    }
    raw[i] = 1.0 / std::max(u, kUncertaintyEpsilon);
    total += raw[i];
  }
  std::vector<double> scaled(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    scaled[i] = raw[i] / total * (5.0 * n - 1.0) + 1.0 / n;
  }
  return scaled;
}

std::vector<ConfidenceLevel> map_confidences(std::span<const double> uncertainties) {
  const auto scaled = scaled_confidences(uncertainties);
  std::vector<ConfidenceLevel> levels(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    const double clamped = std::clamp(scaled[i], 1.0, 10.0);
    // std::round rounds halfway cases away from zero.
    levels[i] = ConfidenceLevel{static_cast<int>(std::round(clamped)),
                                static_cast<int>(i)};
  }
  return levels;
}

std::vector<ConfidenceLevel> oracle_confidences(
    std::span<const metrics::UncertaintyScore> flags) {
  std::vector<ConfidenceLevel> levels;
  levels.reserve(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i].is_oracle()) {
      throw WrongMetricError("oracle_confidences requires oracle scores");
    }
    levels.push_back(ConfidenceLevel{flags[i].correct ? 10 : 1, static_cast<int>(i)});
  }
  return levels;
}

}  // namespace debunc::confidence
