#include "debunc/api_client.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "debunc/debate.hpp"
#include "debunc/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace debunc::api {

void ApiConfig::validate() const {
  if (endpoint_url.empty()) throw ConfigError("api backend: endpoint_url is required");
  if (endpoint_url.rfind("http://", 0) != 0 && endpoint_url.rfind("https://", 0) != 0) {
    throw ConfigError("api backend: endpoint_url must start with http:// or https://");
  }
  if (model.empty()) throw ConfigError("api backend: model name is required");
  if (top_logprobs < 1) throw ConfigError("api backend: top_logprobs must be at least 1");
  if (max_attempts < 1) throw ConfigError("api backend: max_attempts must be at least 1");
  if (backoff_base_seconds < 0.0) {
    throw ConfigError("api backend: backoff base must be non-negative");
  }
  if (concurrency < 1) throw ConfigError("api backend: concurrency must be at least 1");
}

namespace {

/// Simple counted gate; std::counting_semaphore needs a compile-time
/// ceiling, and this also keeps the dependency surface minimal.
class Gate {
 public:
  explicit Gate(int slots) : slots_(slots) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
};

struct GateGuard {
  explicit GateGuard(Gate& gate) : gate_(gate) { gate_.acquire(); }
  ~GateGuard() { gate_.release(); }
  Gate& gate_;
};

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

struct ApiBackend::Impl {
  ApiConfig config;
  std::string base_url;
  std::string path;
  Gate gate;
  std::function<void(double)> sleeper;
  std::function<double()> jitter;
  std::mutex jitter_mu;  // the default jitter engine is not thread-safe

  explicit Impl(ApiConfig cfg)
      : config(std::move(cfg)),
        gate(config.concurrency),
        sleeper([](double seconds) {
          std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
        }) {
    config.validate();
    // Split "scheme://host[:port]/maybe/path" into client base and path.
    const std::size_t scheme_end = config.endpoint_url.find("://") + 3;
    const std::size_t slash = config.endpoint_url.find('/', scheme_end);
    if (slash == std::string::npos) {
      base_url = config.endpoint_url;
      path = "/v1/chat/completions";
    } else {
      base_url = config.endpoint_url.substr(0, slash);
      path = config.endpoint_url.substr(slash);
    }
    auto engine = std::make_shared<std::mt19937_64>(std::random_device{}());
    jitter = [this, engine] {
      std::lock_guard lock(jitter_mu);
      return std::uniform_real_distribution<double>(0.0, 1.0)(*engine);
    };
  }
};

ApiBackend::ApiBackend(ApiConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

ApiBackend::~ApiBackend() = default;

void ApiBackend::set_sleeper(std::function<void(double)> sleeper) {
  impl_->sleeper = std::move(sleeper);
}

void ApiBackend::set_jitter(std::function<double()> jitter) {
  impl_->jitter = std::move(jitter);
}

backends::BackendCapabilities ApiBackend::capabilities() const {
  return {.has_full_distributions = false,
          .has_topk_logprobs = true,
          .supports_attention_scaling = false};
}

std::size_t ApiBackend::count_tokens(std::string_view text) const {
  // Bookkeeping only: attention methods are rejected on this backend, so
  // span offsets computed from this are never consumed.
  return text.size();
}

namespace {

struct ParsedReply {
  std::string text;
  std::vector<metrics::TokenRecord> tokens;
};

/// Maps the wire reply to token records. Token ids are interned surface
/// strings (first-seen order) since the protocol exposes none; the sampled
/// token keeps its exact logprob and joins its own top-k distribution when
/// absent from it.
ParsedReply parse_reply(const std::string& body, int top_k) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("api backend: reply is not JSON: ") + e.what());
  }

  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw ParseError("api backend: reply has no choices");
  }
  const nlohmann::json& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content")) {
    throw ParseError("api backend: reply choice has no message content");
  }

  ParsedReply out;
  out.text = choice["message"]["content"].get<std::string>();

  if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
      !choice["logprobs"].contains("content") || choice["logprobs"]["content"].is_null()) {
    throw CapabilityError(
        "api backend: reply carries no logprobs; the endpoint must support "
        "logprobs with top_logprobs");
  }

  std::map<std::string, std::int32_t> intern;
  auto id_of = [&intern](const std::string& surface) {
    auto [it, inserted] =
        intern.emplace(surface, static_cast<std::int32_t>(intern.size()));
    return it->second;
  };

  for (const nlohmann::json& item : choice["logprobs"]["content"]) {
    if (!item.contains("token") || !item.contains("logprob")) {
      throw ParseError("api backend: malformed logprob entry");
    }
    metrics::TokenRecord record;
    record.surface = item["token"].get<std::string>();
    record.logprob = item["logprob"].get<double>();
    record.token_id = id_of(record.surface);

    std::map<std::int32_t, double> probs;
    if (item.contains("top_logprobs") && item["top_logprobs"].is_array()) {
      for (const nlohmann::json& alt : item["top_logprobs"]) {
        if (!alt.contains("token") || !alt.contains("logprob")) continue;
        probs[id_of(alt["token"].get<std::string>())] =
            std::exp(alt["logprob"].get<double>());
      }
    }
    probs.emplace(record.token_id, std::exp(record.logprob));
    record.distribution = metrics::TokenDistribution::topk_dist(
        std::move(probs), std::max(top_k, 1));
    out.tokens.push_back(std::move(record));
  }
  if (out.tokens.empty()) {
    throw CapabilityError("api backend: reply carries an empty logprob list");
  }
  return out;
}

}  // namespace

backends::AgentResponse ApiBackend::generate(const backends::GenerationRequest& request) {
  if (request.question == nullptr) {
    throw PreconditionError("generation request lacks a question");
  }

  nlohmann::json body;
  body["model"] = impl_->config.model;
  body["messages"] = nlohmann::json::array();
  for (const backends::ChatMessage& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["logprobs"] = true;
  body["top_logprobs"] = impl_->config.top_logprobs;
  body["seed"] = static_cast<std::int64_t>(request.seed & 0x7fffffffffffffffULL);
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(impl_->config.api_key_env.c_str());
      key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  GateGuard guard(impl_->gate);

  std::string last_failure;
  for (int attempt = 1; attempt <= impl_->config.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double delay = impl_->config.backoff_base_seconds *
                           std::pow(2.0, attempt - 2) * (1.0 + impl_->jitter());
      impl_->sleeper(delay);
    }

    httplib::Client client(impl_->base_url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(120));
    httplib::Result result = client.Post(impl_->path, headers, payload, "application/json");

    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status != 200) {
      const std::string detail =
          "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 200);
      if (retryable_status(result->status)) {
        last_failure = detail;
        continue;
      }
      throw BackendError("api backend: " + detail);
    }

    ParsedReply reply = parse_reply(result->body, impl_->config.top_logprobs);
    backends::AgentResponse response;
    response.agent_id = request.agent_id;
    response.round = request.round;
    response.text = std::move(reply.text);
    response.tokens = std::move(reply.tokens);
    response.extracted_answer =
        debate::extract_answer(response.text, request.question->kind);
    response.uncertainty =
        backends::score_response(request.metric, response.tokens,
                                 response.extracted_answer, request.question->answer);
    return response;
  }
  throw BackendError("api backend: giving up after " +
                     std::to_string(impl_->config.max_attempts) +
                     " attempts; last failure: " + last_failure);
}

}  // namespace debunc::api
