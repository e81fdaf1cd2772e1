#include "debunc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "debunc/errors.hpp"

namespace debunc::metrics {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::entropy: return "entropy";
    case Metric::tokensar: return "tokensar";
    case Metric::oracle: return "oracle";
  }
  return "entropy";
}

Metric metric_from_string(const std::string& s) {
  if (s == "entropy") return Metric::entropy;
  if (s == "tokensar") return Metric::tokensar;
  if (s == "oracle") return Metric::oracle;
  throw ParseError("unknown metric: " + s);
}

TokenDistribution TokenDistribution::full_dist(std::map<std::int32_t, double> probs) {
  TokenDistribution d;
  d.probabilities = std::move(probs);
  d.full = true;
  d.validate();
  return d;
}

TokenDistribution TokenDistribution::topk_dist(std::map<std::int32_t, double> probs, int k) {
  TokenDistribution d;
  d.probabilities = std::move(probs);
  d.full = false;
  d.top_k = k;
  d.validate();
  return d;
}

double TokenDistribution::mass() const {
  double s = 0.0;
  for (const auto& [id, p] : probabilities) s += p;
  return s;
}

void TokenDistribution::validate() const {
  if (probabilities.empty()) {
    throw PreconditionError("token distribution has no entries");
  }
  for (const auto& [id, p] : probabilities) {
    if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p)) {
      throw PreconditionError("token probability outside [0,1] for id " + std::to_string(id));
    }
  }
  const double m = mass();
  if (full) {
    if (std::abs(m - 1.0) > 1e-6) {
      throw PreconditionError("full distribution mass " + std::to_string(m) + " != 1");
    }
  } else {
    if (top_k < 1) throw PreconditionError("top-k distribution requires k >= 1");
    if (m > 1.0 + 1e-9) {
      throw PreconditionError("top-k distribution mass " + std::to_string(m) + " > 1");
    }
  }
}

void TokenRecord::validate() const {
  if (!std::isfinite(logprob) || logprob > 0.0) {
    throw PreconditionError("token logprob must be finite and <= 0");
  }
  if (distribution) {
    distribution->validate();
    const auto it = distribution->probabilities.find(token_id);
    const double stored = it == distribution->probabilities.end() ? 0.0 : it->second;
    if (std::abs(stored - std::exp(logprob)) > 1e-6) {
      throw PreconditionError("distribution does not assign exp(logprob) to the sampled token");
    }
  }
}

UncertaintyScore UncertaintyScore::scalar(double value, Metric metric, bool approximate) {
  if (!std::isfinite(value) || value < 0.0) {
    throw PreconditionError("scalar uncertainty must be finite and >= 0");
  }
  if (metric == Metric::oracle) {
    throw WrongMetricError("oracle metric scores carry a flag, not a scalar");
  }
  UncertaintyScore s;
  s.kind = Kind::scalar;
  s.metric = metric;
  s.value = value;
  s.approximate = approximate;
  return s;
}

UncertaintyScore UncertaintyScore::oracle(bool correct) {
  UncertaintyScore s;
  s.kind = Kind::oracle;
  s.metric = Metric::oracle;
  s.correct = correct;
  return s;
}

double UncertaintyScore::scalar_value() const {
  if (kind != Kind::scalar) {
    throw WrongMetricError("oracle score has no scalar value");
  }
  return value;
}

namespace {

double entropy_of(const TokenDistribution& dist) {
  // Top-k slices are renormalized to unit mass so the entropy is that of
  // the conditional distribution over the observed tokens.
  const double mass = dist.full ? 1.0 : dist.mass();
  if (mass <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto& [id, p] : dist.probabilities) {
    const double q = p / mass;
    if (q > 0.0) h -= q * std::log(q);
  }
  return std::max(h, 0.0);
}

}  // namespace

UncertaintyScore mean_token_entropy(std::span<const TokenDistribution> dists) {
  if (dists.empty()) throw EmptyInputError("mean_token_entropy: no distributions");
  double total = 0.0;
  bool approximate = false;
  for (const auto& d : dists) {
    d.validate();
    total += entropy_of(d);
    approximate = approximate || !d.full;
  }
  return UncertaintyScore::scalar(total / static_cast<double>(dists.size()),
                                  Metric::entropy, approximate);
}

UncertaintyScore token_sar(std::span<const TokenRecord> tokens, const RelevanceScorer& scorer) {
  if (tokens.empty()) throw EmptyInputError("token_sar: no tokens");
  std::vector<double> rel(tokens.size());
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tokens[i].validate();
    rel[i] = scorer(tokens, i);
    if (!std::isfinite(rel[i]) || rel[i] < 0.0) {
      throw PreconditionError("relevance scorer returned a value outside [0,inf)");
    }
    total += rel[i];
  }
  if (total <= 0.0) {
    throw DegenerateRelevanceError("token_sar: all relevances are zero");
  }
  double score = 0.0;
  bool approximate = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    score += -tokens[i].logprob * (rel[i] / total);
    if (tokens[i].distribution && !tokens[i].distribution->full) approximate = true;
  }
  return UncertaintyScore::scalar(std::max(score, 0.0), Metric::tokensar, approximate);
}

UncertaintyScore oracle_uncertainty(const Answer& extracted, const Answer& truth) {
  return UncertaintyScore::oracle(matches(extracted, truth));
}

double auroc(std::span<const std::pair<double, bool>> samples) {
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  std::vector<std::pair<double, bool>> pool(samples.begin(), samples.end());
  for (const auto& [u, correct] : pool) {
    if (!std::isfinite(u)) throw PreconditionError("auroc: non-finite uncertainty");
    (correct ? n_correct : n_incorrect)++;
  }
  if (n_correct == 0 || n_incorrect == 0) {
    throw UndefinedAurocError("auroc needs at least one correct and one incorrect sample");
  }

  // Rank formulation of the Mann-Whitney statistic; tied values receive
  // their average rank, which counts tied pairs as 0.5.
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double incorrect_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < pool.size()) {
    std::size_t j = i;
    while (j < pool.size() && pool[j].first == pool[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (!pool[k].second) incorrect_rank_sum += avg_rank;
    }
    i = j;
  }
  const double n_i = static_cast<double>(n_incorrect);
  const double u_stat = incorrect_rank_sum - n_i * (n_i + 1.0) / 2.0;
  return u_stat / (static_cast<double>(n_correct) * n_i);
}

double auroc(std::span<const std::pair<UncertaintyScore, bool>> samples) {
  std::vector<std::pair<double, bool>> plain;
  plain.reserve(samples.size());
  for (const auto& [score, correct] : samples) {
    // Oracle flags read as 0 (correct) / 1 (incorrect): the ordering is what
    // AUROC measures, and it makes the oracle metric score exactly 1.
    const double u = score.is_oracle() ? (score.correct ? 0.0 : 1.0) : score.scalar_value();
    plain.emplace_back(u, correct);
  }
  return auroc(std::span<const std::pair<double, bool>>(plain));
}

double default_relevance_at(std::span<const TokenRecord> tokens, std::size_t index) {
  const auto n = static_cast<double>(tokens.size());
  double freq = 0.0;
  for (const auto& t : tokens) {
    if (t.surface == tokens[index].surface) freq += 1.0;
  }
  return std::max(1.0 - freq / n, 0.05);
}

std::vector<double> default_relevance(std::span<const TokenRecord> tokens) {
  if (tokens.empty()) throw EmptyInputError("default_relevance: no tokens");
  std::vector<double> rel(tokens.size());
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    rel[i] = default_relevance_at(tokens, i);
    total += rel[i];
  }
  for (auto& r : rel) r /= total;
  return rel;
}

}  // namespace debunc::metrics
