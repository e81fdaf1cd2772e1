#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debunc/answer.hpp"

namespace debunc::metrics {

/// Which uncertainty metric produced a score.
enum class Metric { entropy, tokensar, oracle };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// Probability distribution over token ids for one generation step. Either
/// the full vocabulary distribution or the top-k slice of it.
struct TokenDistribution {
  std::map<std::int32_t, double> probabilities;
  bool full = true;
  int top_k = 0;  // meaningful when !full; must be >= 1

  static TokenDistribution full_dist(std::map<std::int32_t, double> probs);
  static TokenDistribution topk_dist(std::map<std::int32_t, double> probs, int k);

  double mass() const;

  /// Throws PreconditionError on invariant violations: probabilities outside
  /// [0,1], full mass off 1 by more than 1e-6, top-k mass above 1 or k < 1.
  void validate() const;
};

/// One generated token: id, surface text, log probability of the sampled
/// token, and optionally the distribution it was sampled from.
struct TokenRecord {
  std::int32_t token_id = 0;
  std::string surface;
  double logprob = 0.0;  // <= 0
  std::optional<TokenDistribution> distribution;

  void validate() const;
};

/// A per-response uncertainty value. Scalar metrics carry a non-negative
/// real; the oracle metric carries only a correctness flag, never 0/infinity
/// literals, so downstream arithmetic stays finite.
struct UncertaintyScore {
  enum class Kind { scalar, oracle };

  Kind kind = Kind::scalar;
  Metric metric = Metric::entropy;
  double value = 0.0;     // scalar kind
  bool correct = false;   // oracle kind
  bool approximate = false;  // true when computed from top-k data

  static UncertaintyScore scalar(double value, Metric metric, bool approximate = false);
  static UncertaintyScore oracle(bool correct);

  bool is_scalar() const { return kind == Kind::scalar; }
  bool is_oracle() const { return kind == Kind::oracle; }

  /// Scalar value of the score; throws WrongMetricError for oracle scores.
  double scalar_value() const;
};

/// Relevance of the token at `index` within `tokens`, in [0,1]. Must be
/// deterministic for fixed inputs; callers normalize returned relevances
/// over the sequence to sum to 1.
using RelevanceScorer =
    std::function<double(std::span<const TokenRecord> tokens, std::size_t index)>;

/// Mean per-token Shannon entropy (natural log) across the generation.
/// Zero-probability entries contribute nothing. Top-k distributions are
/// renormalized to unit mass first and flag the result as approximate.
UncertaintyScore mean_token_entropy(std::span<const TokenDistribution> dists);

/// Relevance-weighted average of per-token negative log probabilities.
/// Raw scorer outputs are normalized to sum to 1 over the sequence, which
/// makes the weighted sum a weighted average and cancels any uniform
/// scaling of the raw relevances.
UncertaintyScore token_sar(std::span<const TokenRecord> tokens, const RelevanceScorer& scorer);

/// Idealized metric: low uncertainty exactly when the response is correct.
/// Consumers map the flag to their own constants (confidence 1/10,
/// multiplier 1e-5/1).
UncertaintyScore oracle_uncertainty(const Answer& extracted, const Answer& truth);

/// Probability that a correct response carries lower uncertainty than an
/// incorrect one (Mann-Whitney statistic, ties counted 0.5). Requires at
/// least one sample of each class and scalar scores throughout.
double auroc(std::span<const std::pair<UncertaintyScore, bool>> samples);

/// Convenience overload over plain scalar uncertainties.
double auroc(std::span<const std::pair<double, bool>> samples);

/// Deterministic surrogate relevance: a token's raw relevance is
/// 1 - frequency(surface)/N floored at 0.05, so rare tokens weigh more than
/// repeated filler. Returns the list normalized to sum to 1.
std::vector<double> default_relevance(std::span<const TokenRecord> tokens);

/// Raw (unnormalized) scorer implementing the same rule, for use as a
/// RelevanceScorer with token_sar.
double default_relevance_at(std::span<const TokenRecord> tokens, std::size_t index);

}  // namespace debunc::metrics
