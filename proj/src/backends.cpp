#include "debunc/backends.hpp"

#include <algorithm>
#include <utility>

#include "debunc/debate.hpp"
#include "debunc/errors.hpp"

namespace debunc::backends {

void SyntheticAgentProfile::validate() const {
  if (p_correct < 0.0 || p_correct > 1.0) {
    throw ConfigError("synthetic profile: p_correct must lie in [0,1]");
  }
  if (stubbornness < 0.0 || stubbornness > 1.0) {
    throw ConfigError("synthetic profile: stubbornness must lie in [0,1]");
  }
  for (const UniformRange& r :
       {uncertainty_given_correct, uncertainty_given_incorrect}) {
    if (r.lo < 0.0 || r.lo > r.hi) {
      throw ConfigError("synthetic profile: uncertainty range needs 0 <= lo <= hi");
    }
  }
}

metrics::UncertaintyScore score_response(metrics::Metric metric,
                                         std::span<const metrics::TokenRecord> tokens,
                                         const Answer& extracted, const Answer& truth) {
  switch (metric) {
    case metrics::Metric::oracle:
      return metrics::oracle_uncertainty(extracted, truth);
    case metrics::Metric::entropy: {
      std::vector<metrics::TokenDistribution> dists;
      dists.reserve(tokens.size());
      for (const auto& tok : tokens) {
        if (!tok.distribution.has_value()) {
          throw CapabilityError("entropy metric needs a distribution per token");
        }
        dists.push_back(*tok.distribution);
      }
      return metrics::mean_token_entropy(dists);
    }
    case metrics::Metric::tokensar:
      return metrics::token_sar(tokens, metrics::default_relevance_at);
  }
  throw ConfigError("unknown metric");
}

namespace {

Answer random_distractor(const Question& question, Rng& rng) {
  if (is_multiple_choice(question.kind)) {
    std::string letters = question.option_letters();
    letters.erase(letters.find(question.answer.letter()), 1);
    return Answer::of_letter(letters[rng.below(letters.size())]);
  }
  // Free-response: a near-miss around the truth keeps vote dynamics
  // realistic (distinct wrong agents usually hold distinct wrong answers).
  static constexpr std::int64_t kOffsets[] = {-2, -1, 1, 2};
  return Answer::of_integer(question.answer.integer() + kOffsets[rng.below(4)]);
}

Answer fresh_draw(const SyntheticAgentProfile& profile, const Question& question,
                  Rng& rng) {
  return rng.bernoulli(profile.p_correct) ? question.answer
                                          : random_distractor(question, rng);
}

}  // namespace

AgentResponse synthetic_generate(const SyntheticAgentProfile& profile,
                                 const Question& question,
                                 std::span<const PeerInfluence> peer_context, Rng& rng,
                                 metrics::Metric metric) {
  profile.validate();

  Answer chosen;
  if (peer_context.empty()) {
    chosen = fresh_draw(profile, question, rng);
  } else {
    const PeerInfluence* self = nullptr;
    for (const auto& entry : peer_context) {
      if (!entry.self) continue;
      if (self != nullptr) {
        throw PreconditionError("synthetic peer context has multiple self entries");
      }
      self = &entry;
    }
    if (self == nullptr) {
      throw PreconditionError("synthetic peer context lacks the agent's own entry");
    }

    if (profile.stubbornness > 0.0 && rng.bernoulli(profile.stubbornness)) {
      chosen = self->answer;
    } else {
      // Score each distinct valid answer by the sum of its proposers'
      // weights, in first-proposal order so tie handling is deterministic.
      std::vector<std::pair<Answer, double>> buckets;
      for (const auto& entry : peer_context) {
        if (!entry.answer.valid()) continue;
        const double w =
            profile.influence_rule == SyntheticAgentProfile::InfluenceRule::uniform
                ? 1.0
                : entry.weight;
        auto it = std::find_if(buckets.begin(), buckets.end(),
                               [&](const auto& b) { return b.first == entry.answer; });
        if (it == buckets.end()) {
          buckets.emplace_back(entry.answer, w);
        } else {
          it->second += w;
        }
      }
      if (buckets.empty()) {
        // Nobody holds a valid position; start over as in round 1.
        chosen = fresh_draw(profile, question, rng);
      } else {
        double best = buckets.front().second;
        for (const auto& [answer, weight] : buckets) best = std::max(best, weight);
        std::vector<const Answer*> tied;
        for (const auto& [answer, weight] : buckets) {
          if (weight == best) tied.push_back(&answer);
        }
        const bool self_tied =
            self->answer.valid() &&
            std::any_of(tied.begin(), tied.end(),
                        [&](const Answer* a) { return *a == self->answer; });
        chosen = self_tied ? self->answer : *tied[rng.below(tied.size())];
      }
    }
  }

  const bool correct = matches(chosen, question.answer);
  metrics::UncertaintyScore uncertainty;
  if (metric == metrics::Metric::oracle) {
    uncertainty = metrics::UncertaintyScore::oracle(correct);
  } else {
    const UniformRange& range = correct ? profile.uncertainty_given_correct
                                        : profile.uncertainty_given_incorrect;
    uncertainty =
        metrics::UncertaintyScore::scalar(rng.uniform(range.lo, range.hi), metric);
  }

  AgentResponse response;
  response.text = "Answer: " + chosen.str();
  response.extracted_answer = chosen;
  response.uncertainty = uncertainty;
  return response;
}

SyntheticBackend::SyntheticBackend(SyntheticAgentProfile profile)
    : profile_(std::move(profile)) {
  profile_.validate();
}

BackendCapabilities SyntheticBackend::capabilities() const {
  // The simulation consumes multipliers as influence weights directly, so
  // attention methods are meaningful; there is no token stream to report.
  return {.has_full_distributions = false,
          .has_topk_logprobs = false,
          .supports_attention_scaling = true};
}

AgentResponse SyntheticBackend::generate(const GenerationRequest& request) {
  if (request.question == nullptr) {
    throw PreconditionError("generation request lacks a question");
  }
  Rng rng(request.seed);
  AgentResponse response = synthetic_generate(profile_, *request.question,
                                              request.peer_context, rng, request.metric);
  response.agent_id = request.agent_id;
  response.round = request.round;
  return response;
}

std::size_t SyntheticBackend::count_tokens(std::string_view text) const {
  return text.size();  // byte-level accounting, same as the tiny decoder
}

TinyLmBackend::TinyLmBackend(std::shared_ptr<const tinylm::TinyModel> model)
    : model_(std::move(model)) {
  if (!model_) throw PreconditionError("tinylm backend needs a model");
}

BackendCapabilities TinyLmBackend::capabilities() const {
  return {.has_full_distributions = true,
          .has_topk_logprobs = true,
          .supports_attention_scaling = true};
}

AgentResponse TinyLmBackend::generate(const GenerationRequest& request) {
  if (request.question == nullptr) {
    throw PreconditionError("generation request lacks a question");
  }
  std::vector<std::int32_t> prompt_tokens = tinylm::TinyModel::tokenize(request.prompt);
  attnscale::SpanMap spans = request.spans;

  // Debate histories quickly outgrow the model's small window; keep the most
  // recent suffix and shift the spans with it. Spans that fall off the front
  // are dropped - their content is gone from the context anyway.
  const std::size_t context_len =
      static_cast<std::size_t>(model_->config().context_len);
  const std::size_t budget =
      context_len > static_cast<std::size_t>(request.max_tokens) + 1
          ? context_len - static_cast<std::size_t>(request.max_tokens) - 1
          : 1;
  if (prompt_tokens.size() > budget) {
    const std::size_t drop = prompt_tokens.size() - budget;
    prompt_tokens.erase(prompt_tokens.begin(),
                        prompt_tokens.begin() + static_cast<std::ptrdiff_t>(drop));
    attnscale::SpanMap shifted;
    for (const attnscale::Span& span : spans.entries) {
      if (span.end <= drop) continue;
      shifted.entries.push_back(
          {span.agent_id, span.start > drop ? span.start - drop : 0, span.end - drop});
    }
    spans = std::move(shifted);
  }

  tinylm::SamplingParams sampling;
  sampling.temperature = request.temperature;
  sampling.seed = request.seed;
  sampling.max_tokens = request.max_tokens;
  tinylm::GenerationTrace trace =
      model_->generate(prompt_tokens, spans, request.multipliers, sampling);

  AgentResponse response;
  response.agent_id = request.agent_id;
  response.round = request.round;
  response.text = trace.text();
  response.tokens = std::move(trace.tokens);
  response.extracted_answer =
      debate::extract_answer(response.text, request.question->kind);
  response.uncertainty = score_response(request.metric, response.tokens,
                                        response.extracted_answer,
                                        request.question->answer);
  return response;
}

std::size_t TinyLmBackend::count_tokens(std::string_view text) const {
  return tinylm::TinyModel::tokenize(text).size();
}

}  // namespace debunc::backends
