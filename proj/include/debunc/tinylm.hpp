#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "debunc/attnscale.hpp"
#include "debunc/metrics.hpp"

namespace debunc::tinylm {

/// Shape and seed of the bundled decoder. The model is untrained by design:
/// it demonstrates the attention-rescaling mechanism, not language ability.
struct TinyModelConfig {
  std::int32_t vocab_size = 256;
  std::int32_t layers = 2;
  std::int32_t heads = 2;
  std::int32_t model_dim = 64;
  std::int32_t context_len = 512;
  std::uint64_t seed = 0;

  /// Throws ConfigError when the shape is unusable (vocab < 2, context < 2,
  /// model_dim not divisible by heads, ...).
  void validate() const;
};

struct SamplingParams {
  double temperature = 1.0;  // 0 selects greedy decoding
  std::uint64_t seed = 0;
  int max_tokens = 16;
};

/// Pre/post rescale attention for one (step, layer, head).
struct AttentionSnapshot {
  attnscale::AttentionVector pre;
  attnscale::AttentionVector post;
};

/// All attention rows recorded during one decode step, indexed
/// [layer][head].
struct StepAttention {
  std::vector<std::vector<AttentionSnapshot>> layers;
};

struct GenerationTrace {
  /// Emitted tokens, each with the full sampling distribution attached.
  std::vector<metrics::TokenRecord> tokens;
  /// One entry per decode pass; steps[i] was the pass that consumed
  /// tokens[i] and produced the distribution of tokens[i+1]. The first
  /// token's distribution comes from the prompt prefill, whose attention is
  /// never rescaled or recorded.
  std::vector<StepAttention> steps;
  bool truncated = false;

  std::vector<metrics::TokenDistribution> distributions() const;
  std::string text() const;
};

/// Minimal decoder-only transformer with deterministic pseudo-random
/// weights. Bytes are the token space. A model is immutable after
/// construction and safe to share across threads; every generation owns its
/// private KV cache and RNG.
class TinyModel {
 public:
  explicit TinyModel(const TinyModelConfig& config);

  const TinyModelConfig& config() const { return config_; }

  /// Autoregressive sampling. Post-softmax attention rows of decode steps
  /// are passed through attnscale::rescale_weights before the value-weighted
  /// sum; prefill rows are left untouched. Spans must lie within the prompt.
  /// Prompt plus generation never exceeds the context window: emission stops
  /// early with `truncated` set when max_tokens does not fit.
  GenerationTrace generate(std::span<const std::int32_t> prompt,
                           const attnscale::SpanMap& spans,
                           const attnscale::MultiplierSet& multipliers,
                           const SamplingParams& sampling) const;

  /// Convenience overload without any attention hook.
  GenerationTrace generate(std::span<const std::int32_t> prompt,
                           const SamplingParams& sampling) const;

  /// Full-vocabulary logits at the last position of `tokens`.
  std::vector<double> last_logits(std::span<const std::int32_t> tokens) const;

  /// Flat little-endian float32 weight dump preceded by a config header,
  /// for cross-implementation comparison.
  void dump_weights(const std::filesystem::path& path) const;
  static TinyModel load_weights(const std::filesystem::path& path);

  static std::vector<std::int32_t> tokenize(std::string_view text);
  static std::string detokenize(std::span<const std::int32_t> tokens);

 private:
  struct LayerWeights {
    std::vector<float> ln1_gain, ln1_bias;
    std::vector<float> wq, wk, wv, wo;        // [dim x dim], row-major
    std::vector<float> ln2_gain, ln2_bias;
    std::vector<float> w_in, b_in;            // [hidden x dim], [hidden]
    std::vector<float> w_out, b_out;          // [dim x hidden], [dim]
  };

  struct Cache;  // per-generation KV state

  TinyModel(const TinyModelConfig& config, bool generate_weights);

  void init_weights();
  void for_each_tensor(const std::function<void(std::vector<float>&)>& fn);

  /// Runs one token through the stack, returns logits. `rescale` controls
  /// whether decode-time attention rescaling applies; `record` receives the
  /// attention rows when non-null.
  std::vector<double> forward_one(Cache& cache, std::int32_t token, bool rescale,
                                  const attnscale::SpanMap& spans,
                                  const attnscale::MultiplierSet& multipliers,
                                  StepAttention* record) const;

  TinyModelConfig config_;
  int head_dim_ = 0;
  int hidden_dim_ = 0;
  std::vector<float> tok_emb_;   // [vocab x dim]
  std::vector<float> pos_emb_;   // [context x dim]
  std::vector<LayerWeights> layers_;
  std::vector<float> ln_f_gain_, ln_f_bias_;
  std::vector<float> w_unembed_;  // [vocab x dim]
};

}  // namespace debunc::tinylm
