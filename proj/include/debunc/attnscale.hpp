#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "debunc/metrics.hpp"

namespace debunc::attnscale {

/// Token-index range [start, end) in a context attributed to one agent's
/// quoted response.
struct Span {
  int agent_id = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const Span&) const = default;
};

/// Non-overlapping spans, at most one per agent per round.
struct SpanMap {
  std::vector<Span> entries;

  bool empty() const { return entries.empty(); }

  /// Throws PreconditionError on overlap, empty/inverted ranges, or a
  /// duplicated agent id.
  void validate() const;

  /// Additionally checks that every span fits a context of `length` tokens.
  void validate_within(std::size_t length) const;
};

/// Per-agent attention multiplier m_j > 0.
struct MultiplierSet {
  std::map<int, double> by_agent;

  void set(int agent_id, double m) { by_agent[agent_id] = m; }
  double at(int agent_id) const;
  bool all_equal_one() const;
  void validate() const;
};

/// Post-softmax attention weights over context positions; sums to 1
/// within 1e-6.
using AttentionVector = std::vector<double>;

/// Oracle multipliers: 1e-5 for an incorrect agent, 1 for a correct one.
inline constexpr double kOracleIncorrectMultiplier = 1e-5;

/// Converts one uncertainty score per agent (agent id = list position) to
/// multipliers. Scalar scores invert (with the same epsilon clamp used by
/// the confidence mapping); oracle flags map to {1, 1e-5}. Mixing kinds
/// throws InconsistentMetricError.
MultiplierSet multipliers_from_uncertainty(std::span<const metrics::UncertaintyScore> scores);

/// Rescales a normalized attention vector: weights inside each agent's span
/// are multiplied by that agent's multiplier, then total mass across the
/// union of spans is restored by one joint normalization factor; weights
/// outside all spans are returned bit-identically. When the spans carry no
/// mass the input is returned unchanged.
AttentionVector rescale_weights(const AttentionVector& weights, const SpanMap& spans,
                                const MultiplierSet& multipliers);

}  // namespace debunc::attnscale
