#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debunc/attnscale.hpp"
#include "debunc/metrics.hpp"
#include "debunc/question.hpp"
#include "debunc/rng.hpp"
#include "debunc/tinylm.hpp"

namespace debunc::backends {

/// What a backend can deliver; the debate module checks these before
/// configuring a method that needs them.
struct BackendCapabilities {
  bool has_full_distributions = false;
  bool has_topk_logprobs = false;
  bool supports_attention_scaling = false;
};

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Behavioral parameters of a simulated agent. The profile controls how
/// often the agent starts out right, how its reported uncertainty relates
/// to correctness, and how it weighs peers when revising.
struct SyntheticAgentProfile {
  enum class InfluenceRule { confidence_weighted, uniform };

  double p_correct = 0.7;
  UniformRange uncertainty_given_correct{0.0, 1.0};
  UniformRange uncertainty_given_incorrect{0.5, 1.5};
  InfluenceRule influence_rule = InfluenceRule::confidence_weighted;
  /// Probability of keeping the previous answer regardless of peers.
  double stubbornness = 0.0;

  void validate() const;
};

struct AgentResponse {
  int agent_id = 0;
  int round = 1;
  std::string text;
  Answer extracted_answer;  // invalid when no answer pattern matched
  std::vector<metrics::TokenRecord> tokens;
  metrics::UncertaintyScore uncertainty;
};

/// One proposer's previous-round position as seen by a synthetic agent.
/// The debate layer has already collapsed whatever the method communicates
/// (confidence level or attention multiplier) into a plain weight, so the
/// simulation consumes numbers, not prompt text.
struct PeerInfluence {
  int agent_id = 0;
  Answer answer;
  double weight = 1.0;
  bool self = false;  // exactly one entry is the agent's own previous answer
};

struct ChatMessage {
  std::string role;  // "user" or "assistant"
  std::string content;
};

struct GenerationRequest {
  const Question* question = nullptr;  // never null
  int agent_id = 0;
  int round = 1;
  /// Full chat history ending with the current user turn.
  std::vector<ChatMessage> messages;
  /// The same history flattened to plain text for token-level backends;
  /// spans index into this text's tokenization.
  std::string prompt;
  attnscale::SpanMap spans;
  attnscale::MultiplierSet multipliers;
  metrics::Metric metric = metrics::Metric::entropy;
  /// Structured previous-round context; consumed by synthetic backends,
  /// empty in round 1 and for text backends.
  std::vector<PeerInfluence> peer_context;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int max_tokens = 64;
};

/// Uniform generation interface. Implementations must tolerate concurrent
/// generate() calls from distinct debates.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendCapabilities capabilities() const = 0;
  virtual AgentResponse generate(const GenerationRequest& request) = 0;

  /// Token count of `text` under this backend's tokenizer; prompt assembly
  /// uses prefix counts of this to place spans.
  virtual std::size_t count_tokens(std::string_view text) const = 0;
};

/// Simulation core, exposed directly for tests: round 1 draws an answer by
/// p_correct and an uncertainty from the matching conditional range; later
/// rounds score every proposed answer by the sum of its proposers' weights
/// and adopt the argmax, keeping the previous answer with probability
/// `stubbornness`. Ties prefer the agent's own answer, then fall to a
/// uniform draw among the tied. Under the uniform rule all weights read
/// as 1.
AgentResponse synthetic_generate(const SyntheticAgentProfile& profile,
                                 const Question& question,
                                 std::span<const PeerInfluence> peer_context, Rng& rng,
                                 metrics::Metric metric = metrics::Metric::entropy);

class SyntheticBackend final : public Backend {
 public:
  explicit SyntheticBackend(SyntheticAgentProfile profile);

  BackendCapabilities capabilities() const override;
  AgentResponse generate(const GenerationRequest& request) override;
  std::size_t count_tokens(std::string_view text) const override;

  const SyntheticAgentProfile& profile() const { return profile_; }

 private:
  SyntheticAgentProfile profile_;
};

class TinyLmBackend final : public Backend {
 public:
  explicit TinyLmBackend(std::shared_ptr<const tinylm::TinyModel> model);

  BackendCapabilities capabilities() const override;
  AgentResponse generate(const GenerationRequest& request) override;
  std::size_t count_tokens(std::string_view text) const override;

  const tinylm::TinyModel& model() const { return *model_; }

 private:
  std::shared_ptr<const tinylm::TinyModel> model_;
};

/// Computes the configured uncertainty metric for a generated response.
/// Shared by the token-level backends: entropy needs distributions,
/// TokenSAR needs sampled logprobs, oracle needs the extracted answer and
/// ground truth.
metrics::UncertaintyScore score_response(metrics::Metric metric,
                                         std::span<const metrics::TokenRecord> tokens,
                                         const Answer& extracted, const Answer& truth);

}  // namespace debunc::backends
