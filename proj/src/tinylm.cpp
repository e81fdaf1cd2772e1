#include "debunc/tinylm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "debunc/errors.hpp"
#include "debunc/rng.hpp"

namespace debunc::tinylm {
namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr char kMagic[4] = {'D', 'B', 'T', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

void layer_norm(const std::vector<double>& x, const std::vector<float>& gain,
                const std::vector<float>& bias, std::vector<double>& out) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<double>(gain[i]) * (x[i] - mean) * inv +
             static_cast<double>(bias[i]);
  }
}

// y = W x, with W row-major [rows x cols].
void matvec(const std::vector<float>& w, const std::vector<double>& x,
            std::size_t rows, std::size_t cols, std::vector<double>& y) {
  y.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = w.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      acc += static_cast<double>(row[c]) * x[c];
    }
    y[r] = acc;
  }
}

double gelu(double x) {
  constexpr double kSqrt2OverPi = 0.7978845608028654;
  return 0.5 * x * (1.0 + std::tanh(kSqrt2OverPi * (x + 0.044715 * x * x * x)));
}

// In-place softmax with max subtraction; returns nothing, normalizes to 1.
void softmax_inplace(std::vector<double>& v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void expect_magic() {
    need(4);
    if (std::memcmp(data_.data() + pos_, kMagic, 4) != 0) {
      throw ParseError("not a tinylm weight file (bad magic)");
    }
    pos_ += 4;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ParseError("tinylm weight file truncated");
  }

  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void TinyModelConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("tinylm: vocab_size must be at least 2");
  if (layers < 1) throw ConfigError("tinylm: layers must be at least 1");
  if (heads < 1) throw ConfigError("tinylm: heads must be at least 1");
  if (model_dim < heads || model_dim % heads != 0) {
    throw ConfigError("tinylm: model_dim must be a positive multiple of heads");
  }
  if (context_len < 2) throw ConfigError("tinylm: context_len must be at least 2");
}

std::vector<metrics::TokenDistribution> GenerationTrace::distributions() const {
  std::vector<metrics::TokenDistribution> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (!tok.distribution.has_value()) {
      throw PreconditionError("generation trace token lacks a distribution");
    }
    out.push_back(*tok.distribution);
  }
  return out;
}

std::string GenerationTrace::text() const {
  std::string out;
  for (const auto& tok : tokens) out += tok.surface;
  return out;
}

struct TinyModel::Cache {
  // keys[layer][pos] and values[layer][pos] are flat model_dim vectors.
  std::vector<std::vector<std::vector<double>>> keys;
  std::vector<std::vector<std::vector<double>>> values;
  int positions = 0;
};

TinyModel::TinyModel(const TinyModelConfig& config) : TinyModel(config, true) {}

TinyModel::TinyModel(const TinyModelConfig& config, bool generate_weights)
    : config_(config) {
  config_.validate();
  head_dim_ = config_.model_dim / config_.heads;
  hidden_dim_ = 4 * config_.model_dim;

  const std::size_t dim = static_cast<std::size_t>(config_.model_dim);
  const std::size_t hidden = static_cast<std::size_t>(hidden_dim_);
  tok_emb_.resize(static_cast<std::size_t>(config_.vocab_size) * dim);
  pos_emb_.resize(static_cast<std::size_t>(config_.context_len) * dim);
  layers_.resize(static_cast<std::size_t>(config_.layers));
  for (auto& layer : layers_) {
    layer.ln1_gain.resize(dim);
    layer.ln1_bias.resize(dim);
    layer.wq.resize(dim * dim);
    layer.wk.resize(dim * dim);
    layer.wv.resize(dim * dim);
    layer.wo.resize(dim * dim);
    layer.ln2_gain.resize(dim);
    layer.ln2_bias.resize(dim);
    layer.w_in.resize(hidden * dim);
    layer.b_in.resize(hidden);
    layer.w_out.resize(dim * hidden);
    layer.b_out.resize(dim);
  }
  ln_f_gain_.resize(dim);
  ln_f_bias_.resize(dim);
  w_unembed_.resize(static_cast<std::size_t>(config_.vocab_size) * dim);

  if (generate_weights) init_weights();
}

void TinyModel::for_each_tensor(const std::function<void(std::vector<float>&)>& fn) {
  fn(tok_emb_);
  fn(pos_emb_);
  for (auto& layer : layers_) {
    fn(layer.ln1_gain);
    fn(layer.ln1_bias);
    fn(layer.wq);
    fn(layer.wk);
    fn(layer.wv);
    fn(layer.wo);
    fn(layer.ln2_gain);
    fn(layer.ln2_bias);
    fn(layer.w_in);
    fn(layer.b_in);
    fn(layer.w_out);
    fn(layer.b_out);
  }
  fn(ln_f_gain_);
  fn(ln_f_bias_);
  fn(w_unembed_);
}

void TinyModel::init_weights() {
  // Counter-based generation: element k of the flattened parameter sequence
  // is uniform(-0.1, 0.1) derived from mix(seed, k), so any element can be
  // reproduced independently of the rest. Norm gains are centered at 1 so
  // the residual stream keeps unit scale and attention logits stay O(1).
  std::unordered_set<const std::vector<float>*> gains;
  for (auto& layer : layers_) {
    gains.insert(&layer.ln1_gain);
    gains.insert(&layer.ln2_gain);
  }
  gains.insert(&ln_f_gain_);

  std::uint64_t counter = 0;
  for_each_tensor([&](std::vector<float>& tensor) {
    const bool is_gain = gains.count(&tensor) > 0;
    for (float& value : tensor) {
      const std::uint64_t bits = Rng::mix(config_.seed, counter++);
      const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;
      const float sample = static_cast<float>(-0.1 + 0.2 * unit);
      value = is_gain ? 1.0f + sample : sample;
    }
  });
}

std::vector<double> TinyModel::forward_one(
    Cache& cache, std::int32_t token, bool rescale,
    const attnscale::SpanMap& spans, const attnscale::MultiplierSet& multipliers,
    StepAttention* record) const {
  const std::size_t dim = static_cast<std::size_t>(config_.model_dim);
  const std::size_t hd = static_cast<std::size_t>(head_dim_);
  const int pos = cache.positions;

  std::vector<double> x(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    x[d] = static_cast<double>(tok_emb_[static_cast<std::size_t>(token) * dim + d]) +
           static_cast<double>(pos_emb_[static_cast<std::size_t>(pos) * dim + d]);
  }

  std::vector<double> normed, q, k, v, ctx(dim), proj, hidden;
  const bool do_rescale = rescale && !spans.entries.empty();

  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerWeights& layer = layers_[li];

    layer_norm(x, layer.ln1_gain, layer.ln1_bias, normed);
    matvec(layer.wq, normed, dim, dim, q);
    matvec(layer.wk, normed, dim, dim, k);
    matvec(layer.wv, normed, dim, dim, v);
    cache.keys[li].push_back(k);
    cache.values[li].push_back(v);
    const std::size_t seq = cache.keys[li].size();

    std::fill(ctx.begin(), ctx.end(), 0.0);
    for (int h = 0; h < config_.heads; ++h) {
      const std::size_t off = static_cast<std::size_t>(h) * hd;
      attnscale::AttentionVector weights(seq);
      const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
      for (std::size_t t = 0; t < seq; ++t) {
        const std::vector<double>& key = cache.keys[li][t];
        double dot = 0.0;
        for (std::size_t d = 0; d < hd; ++d) dot += q[off + d] * key[off + d];
        weights[t] = dot * scale;
      }
      softmax_inplace(weights);

      const attnscale::AttentionVector* effective = &weights;
      attnscale::AttentionVector post;
      if (do_rescale) {
        post = attnscale::rescale_weights(weights, spans, multipliers);
        effective = &post;
      }
      if (record != nullptr) {
        record->layers[li][static_cast<std::size_t>(h)] = {
            weights, do_rescale ? post : weights};
      }

      for (std::size_t t = 0; t < seq; ++t) {
        const double w = (*effective)[t];
        const std::vector<double>& val = cache.values[li][t];
        for (std::size_t d = 0; d < hd; ++d) ctx[off + d] += w * val[off + d];
      }
    }

    matvec(layer.wo, ctx, dim, dim, proj);
    for (std::size_t d = 0; d < dim; ++d) x[d] += proj[d];

    layer_norm(x, layer.ln2_gain, layer.ln2_bias, normed);
    matvec(layer.w_in, normed, static_cast<std::size_t>(hidden_dim_), dim, hidden);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      hidden[i] = gelu(hidden[i] + static_cast<double>(layer.b_in[i]));
    }
    matvec(layer.w_out, hidden, dim, static_cast<std::size_t>(hidden_dim_), proj);
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] += proj[d] + static_cast<double>(layer.b_out[d]);
    }
  }

  cache.positions += 1;

  layer_norm(x, ln_f_gain_, ln_f_bias_, normed);
  std::vector<double> logits;
  matvec(w_unembed_, normed, static_cast<std::size_t>(config_.vocab_size), dim, logits);
  return logits;
}

namespace {

// Turns logits into the sampling distribution, picks a token, and packages
// both into a TokenRecord. Temperature zero collapses to a one-hot argmax.
metrics::TokenRecord sample_token(const std::vector<double>& logits,
                                  double temperature, Rng& rng) {
  std::map<std::int32_t, double> probs;
  std::int32_t chosen = 0;

  if (temperature == 0.0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
      if (logits[i] > logits[best]) best = i;
    }
    chosen = static_cast<std::int32_t>(best);
    probs[chosen] = 1.0;
  } else {
    std::vector<double> scaled(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / temperature;
    softmax_inplace(scaled);
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      if (scaled[i] > 0.0) probs[static_cast<std::int32_t>(i)] = scaled[i];
    }
    const double u = rng.next_unit();
    double cum = 0.0;
    chosen = probs.rbegin()->first;  // fallback against rounding shortfall
    for (const auto& [id, p] : probs) {
      cum += p;
      if (u < cum) {
        chosen = id;
        break;
      }
    }
  }

  metrics::TokenRecord record;
  record.token_id = chosen;
  record.surface = std::string(1, static_cast<char>(static_cast<unsigned char>(chosen)));
  record.logprob = std::log(probs.at(chosen));
  record.distribution = metrics::TokenDistribution::full_dist(std::move(probs));
  return record;
}

}  // namespace

GenerationTrace TinyModel::generate(std::span<const std::int32_t> prompt,
                                    const attnscale::SpanMap& spans,
                                    const attnscale::MultiplierSet& multipliers,
                                    const SamplingParams& sampling) const {
  if (prompt.empty()) throw PreconditionError("tinylm: prompt must not be empty");
  if (prompt.size() > static_cast<std::size_t>(config_.context_len)) {
    throw PreconditionError("tinylm: prompt exceeds the context window");
  }
  for (std::int32_t id : prompt) {
    if (id < 0 || id >= config_.vocab_size) {
      throw PreconditionError("tinylm: prompt token id out of vocabulary range");
    }
  }
  if (sampling.max_tokens < 1) {
    throw PreconditionError("tinylm: max_tokens must be at least 1");
  }
  if (sampling.temperature < 0.0) {
    throw PreconditionError("tinylm: temperature must be non-negative");
  }
  spans.validate();
  spans.validate_within(prompt.size());
  multipliers.validate();

  Cache cache;
  cache.keys.resize(layers_.size());
  cache.values.resize(layers_.size());

  Rng rng(sampling.seed);
  GenerationTrace trace;

  // Every emitted token gets a context position, so the full sequence stays
  // re-scorable (prompt + generation never exceeds the window).
  const std::size_t room = static_cast<std::size_t>(config_.context_len) - prompt.size();
  const std::size_t budget =
      std::min(static_cast<std::size_t>(sampling.max_tokens), room);
  trace.truncated = budget < static_cast<std::size_t>(sampling.max_tokens);
  if (budget == 0) return trace;

  // Prefill: the prompt is consumed with stock attention. Rescaling models
  // an intervention on how the responder reads its peers while writing new
  // tokens, so it applies to decode steps only.
  std::vector<double> logits;
  for (std::int32_t id : prompt) {
    logits = forward_one(cache, id, false, spans, multipliers, nullptr);
  }
  trace.tokens.push_back(sample_token(logits, sampling.temperature, rng));

  while (trace.tokens.size() < budget) {
    StepAttention step;
    step.layers.assign(layers_.size(),
                       std::vector<AttentionSnapshot>(
                           static_cast<std::size_t>(config_.heads)));
    logits = forward_one(cache, trace.tokens.back().token_id, true, spans,
                         multipliers, &step);
    trace.steps.push_back(std::move(step));
    trace.tokens.push_back(sample_token(logits, sampling.temperature, rng));
  }
  return trace;
}

GenerationTrace TinyModel::generate(std::span<const std::int32_t> prompt,
                                    const SamplingParams& sampling) const {
  return generate(prompt, attnscale::SpanMap{}, attnscale::MultiplierSet{}, sampling);
}

std::vector<double> TinyModel::last_logits(std::span<const std::int32_t> tokens) const {
  if (tokens.empty()) throw PreconditionError("tinylm: token sequence must not be empty");
  if (tokens.size() > static_cast<std::size_t>(config_.context_len)) {
    throw PreconditionError("tinylm: token sequence exceeds the context window");
  }
  Cache cache;
  cache.keys.resize(layers_.size());
  cache.values.resize(layers_.size());
  std::vector<double> logits;
  for (std::int32_t id : tokens) {
    if (id < 0 || id >= config_.vocab_size) {
      throw PreconditionError("tinylm: token id out of vocabulary range");
    }
    logits = forward_one(cache, id, false, {}, {}, nullptr);
  }
  return logits;
}

void TinyModel::dump_weights(const std::filesystem::path& path) const {
  std::string blob;
  blob.append(kMagic, 4);
  append_u32(blob, kFormatVersion);
  append_u32(blob, static_cast<std::uint32_t>(config_.vocab_size));
  append_u32(blob, static_cast<std::uint32_t>(config_.layers));
  append_u32(blob, static_cast<std::uint32_t>(config_.heads));
  append_u32(blob, static_cast<std::uint32_t>(config_.model_dim));
  append_u32(blob, static_cast<std::uint32_t>(config_.context_len));
  append_u64(blob, config_.seed);

  std::uint64_t count = 0;
  auto* self = const_cast<TinyModel*>(this);
  self->for_each_tensor([&](std::vector<float>& t) { count += t.size(); });
  append_u64(blob, count);
  self->for_each_tensor([&](std::vector<float>& tensor) {
    for (float value : tensor) append_u32(blob, std::bit_cast<std::uint32_t>(value));
  });

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("tinylm: cannot open " + tmp.string() + " for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw Error("tinylm: failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TinyModel TinyModel::load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("tinylm: cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  ByteReader reader(std::move(data));
  reader.expect_magic();
  if (reader.u32() != kFormatVersion) {
    throw ParseError("tinylm: unsupported weight format version");
  }
  TinyModelConfig config;
  config.vocab_size = static_cast<std::int32_t>(reader.u32());
  config.layers = static_cast<std::int32_t>(reader.u32());
  config.heads = static_cast<std::int32_t>(reader.u32());
  config.model_dim = static_cast<std::int32_t>(reader.u32());
  config.context_len = static_cast<std::int32_t>(reader.u32());
  config.seed = reader.u64();
  const std::uint64_t count = reader.u64();

  TinyModel model(config, false);
  std::uint64_t expected = 0;
  model.for_each_tensor([&](std::vector<float>& t) { expected += t.size(); });
  if (count != expected) {
    throw ParseError("tinylm: weight count does not match the header shape");
  }
  if (reader.remaining() != count * 4) {
    throw ParseError("tinylm: weight payload size mismatch");
  }
  model.for_each_tensor([&](std::vector<float>& tensor) {
    for (float& value : tensor) value = reader.f32();
  });
  return model;
}

std::vector<std::int32_t> TinyModel::tokenize(std::string_view text) {
  std::vector<std::int32_t> out;
  out.reserve(text.size());
  for (unsigned char c : text) out.push_back(static_cast<std::int32_t>(c));
  return out;
}

std::string TinyModel::detokenize(std::span<const std::int32_t> tokens) {
  std::string out;
  out.reserve(tokens.size());
  for (std::int32_t id : tokens) {
    if (id < 0 || id > 255) {
      throw PreconditionError("tinylm: token id outside byte range");
    }
    out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
  }
  return out;
}

}  // namespace debunc::tinylm
