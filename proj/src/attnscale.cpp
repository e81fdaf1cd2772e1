#include "debunc/attnscale.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "debunc/confidence.hpp"
#include "debunc/errors.hpp"

namespace debunc::attnscale {

void SpanMap::validate() const {
  std::set<int> seen;
  for (const auto& s : entries) {
    if (s.start >= s.end) {
      throw PreconditionError("span must satisfy start < end");
    }
    if (!seen.insert(s.agent_id).second) {
      throw PreconditionError("duplicate span for agent " + std::to_string(s.agent_id));
    }
  }
  auto sorted = entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].start < sorted[i - 1].end) {
      throw PreconditionError("spans overlap");
    }
  }
}

void SpanMap::validate_within(std::size_t length) const {
  validate();
  for (const auto& s : entries) {
    if (s.end > length) {
      throw PreconditionError("span [" + std::to_string(s.start) + "," +
                              std::to_string(s.end) + ") exceeds context length " +
                              std::to_string(length));
    }
  }
}

double MultiplierSet::at(int agent_id) const {
  const auto it = by_agent.find(agent_id);
  if (it == by_agent.end()) {
    throw PreconditionError("no multiplier for agent " + std::to_string(agent_id));
  }
  return it->second;
}

bool MultiplierSet::all_equal_one() const {
  return std::all_of(by_agent.begin(), by_agent.end(),
                     [](const auto& kv) { return kv.second == 1.0; });
}

void MultiplierSet::validate() const {
  for (const auto& [id, m] : by_agent) {
    if (!std::isfinite(m) || m <= 0.0) {
      throw PreconditionError("multiplier for agent " + std::to_string(id) +
                              " must be finite and > 0");
    }
  }
}

MultiplierSet multipliers_from_uncertainty(
    std::span<const metrics::UncertaintyScore> scores) {
  if (scores.empty()) throw EmptyInputError("multipliers_from_uncertainty: no scores");
  const bool oracle = scores.front().is_oracle();
  MultiplierSet m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].is_oracle() != oracle) {
      throw InconsistentMetricError("multipliers_from_uncertainty: mixed score kinds");
    }
    if (oracle) {
      m.set(static_cast<int>(i), scores[i].correct ? 1.0 : kOracleIncorrectMultiplier);
    } else {
      m.set(static_cast<int>(i),
            1.0 / std::max(scores[i].scalar_value(), confidence::kUncertaintyEpsilon));
    }
  }
  return m;
}

AttentionVector rescale_weights(const AttentionVector& weights, const SpanMap& spans,
                                const MultiplierSet& multipliers) {
  spans.validate_within(weights.size());
  multipliers.validate();
  for (const double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw PreconditionError("attention weights must be finite and >= 0");
    }
  }

  AttentionVector out = weights;
  if (spans.empty()) return out;

  double span_weight_sum = 0.0;   // sum of w_k over all span tokens
  double span_scaled_sum = 0.0;   // sum of a_k over all span tokens
  for (const auto& s : spans.entries) {
    const double m = multipliers.at(s.agent_id);
    for (std::size_t i = s.start; i < s.end; ++i) {
      span_weight_sum += weights[i];
      span_scaled_sum += weights[i] * m;
    }
  }
  // No mass inside the spans: nothing to redistribute.
  if (span_weight_sum == 0.0) return out;

  const double factor = span_weight_sum / span_scaled_sum;
  for (const auto& s : spans.entries) {
    const double m = multipliers.at(s.agent_id);
    for (std::size_t i = s.start; i < s.end; ++i) {
      out[i] = weights[i] * m * factor;
    }
  }
  return out;
}

}  // namespace debunc::attnscale
