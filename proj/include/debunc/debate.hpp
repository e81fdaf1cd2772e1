#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debunc/attnscale.hpp"
#include "debunc/backends.hpp"
#include "debunc/confidence.hpp"
#include "debunc/metrics.hpp"
#include "debunc/question.hpp"
#include "debunc/rng.hpp"

namespace debunc::debate {

/// How uncertainty is communicated between rounds.
enum class Method { standard, prompt, attn_others, attn_all };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

bool is_attention_method(Method m);

struct DebateConfig {
  int n_agents = 3;
  int n_rounds = 3;
  Method method = Method::standard;
  metrics::Metric metric = metrics::Metric::entropy;
  BenchmarkKind benchmark = BenchmarkKind::arithmetic;
  double temperature = 1.0;
  int max_tokens = 64;

  void validate() const;
};

/// Prompt templates keyed by (benchmark, round kind, confidence variant).
/// The shipped defaults are embedded in the binary; load_dir() reads the
/// same set from text files, letting users adjust wording without
/// rebuilding. Placeholders: {question}, {options}, {few_shot},
/// {agent_response_i}, {confidence_i}.
class TemplateStore {
 public:
  enum class RoundKind { initial, initial_few_shot, debate };

  /// The built-in template set.
  static const TemplateStore& defaults();

  /// Reads <benchmark>_<round>.txt / <benchmark>_debate_prompt.txt files
  /// from a directory; missing files fall back to the built-ins. A final
  /// trailing newline (editor artifact) is stripped.
  static TemplateStore load_dir(const std::filesystem::path& dir);

  /// with_confidence selects the variant carrying the confidence fragments
  /// (only the debate round has one). Throws ConfigError for combinations
  /// that do not exist (e.g. few-shot outside mmlu).
  const std::string& get(BenchmarkKind kind, RoundKind round,
                         bool with_confidence) const;

 private:
  std::map<std::string, std::string> by_key_;
};

struct RoundPrompt {
  std::string text;
  /// Token ranges of each peer's quoted response within `text` (empty for
  /// non-attention methods). Offsets are prompt-local; the debate loop
  /// shifts them into the agent's full flattened history.
  attnscale::SpanMap spans;
};

/// Counts tokens of a text under the acting backend's tokenizer. Span
/// placement relies on prefix counts, so the tokenizer must be
/// prefix-stable (byte-level tokenizers are).
using TokenCounter = std::function<std::size_t(std::string_view)>;

/// Assembles a debate-round prompt (round >= 2): peers in ascending
/// agent-id order, confidence fragments iff method == prompt, span
/// bookkeeping iff the method rescales attention.
RoundPrompt build_round_prompt(const Question& question, BenchmarkKind kind,
                               std::span<const backends::AgentResponse> peers,
                               const std::optional<std::vector<confidence::ConfidenceLevel>>& confidences,
                               Method method, const TokenCounter& count_tokens,
                               const TemplateStore& templates = TemplateStore::defaults());

/// Builds the round-1 prompt for a question (no peers, no spans).
std::string build_initial_prompt(const Question& question,
                                 const TemplateStore& templates = TemplateStore::defaults());

struct RoundEntry {
  backends::AgentResponse response;
  std::string prompt;  // the user-turn text added this round
  /// Spans as supplied to the generation hook: peer responses in the new
  /// user turn plus the agent's own previous response in its history.
  attnscale::SpanMap spans;
  /// Level attached to this agent's response when shared with peers
  /// (method == prompt only).
  std::optional<confidence::ConfidenceLevel> confidence;
};

struct VoteDetail {
  /// Valid answers with their vote counts, in first-proposal order.
  std::vector<std::pair<Answer, int>> counts;
  bool tie_broken = false;
};

struct DebateTranscript {
  Question question;
  DebateConfig config;
  /// rounds[r][a] is agent a's entry in round r+1.
  std::vector<std::vector<RoundEntry>> rounds;
  Answer final_answer;
  bool correct = false;
  VoteDetail vote;
};

/// Plurality vote over final-round answers. Invalid answers never receive
/// votes; ties break by lowest summed uncertainty among the tied answers
/// (oracle flags read as 0/1), then by lowest proposing agent id; an
/// all-invalid round yields the invalid sentinel. `answers[i]` and
/// `uncertainties[i]` belong to agent i.
Answer majority_vote(std::span<const Answer> answers,
                     std::span<const metrics::UncertaintyScore> uncertainties,
                     VoteDetail* detail = nullptr);

/// Pulls the benchmark's answer pattern out of a response: the last
/// "Answer: X" (letter kinds; MMLU permits A-D, TruthfulQA any capital
/// letter), the last "Answer: N" (GSM8k), or the final integer anywhere in
/// the text (arithmetic). No match -> invalid sentinel.
Answer extract_answer(const std::string& text, BenchmarkKind kind);

/// Runs a full debate: round 1 from the initial template, every later
/// round from the debate template with the previous round's responses and,
/// per method, confidence fragments or attention multipliers. All round-k
/// responses complete before any round-k+1 prompt is built. Throws
/// CapabilityError when a backend cannot honor the method; BackendError
/// from a backend aborts the debate (the harness records the question as
/// failed).
DebateTranscript run_debate(const Question& question, const DebateConfig& config,
                            std::span<const std::shared_ptr<backends::Backend>> agent_backends,
                            Rng& rng,
                            const TemplateStore& templates = TemplateStore::defaults());

/// One JSON document per debate; see transcript_to_json for the layout.
std::string transcript_to_json(const DebateTranscript& transcript);
void write_transcript(const std::filesystem::path& path, const DebateTranscript& transcript);

/// Inverse of transcript_to_json over the serialized fields: the returned
/// transcript re-serializes to byte-identical JSON. Only what the document
/// carries comes back (the question as its id, responses without token
/// records). Throws ParseError on malformed documents.
DebateTranscript transcript_from_json(const std::string& text);

}  // namespace debunc::debate
