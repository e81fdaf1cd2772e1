#pragma once

#include <functional>
#include <memory>
#include <string>

#include "debunc/backends.hpp"

namespace debunc::api {

/// Connection settings for an OpenAI-compatible chat-completions endpoint.
/// The URL may carry a path; without one, /v1/chat/completions is assumed.
/// The bearer token is read from the environment (never from config files)
/// and the Authorization header is omitted when the variable is unset, as
/// local inference servers usually run unauthenticated.
struct ApiConfig {
  std::string endpoint_url;
  std::string model;
  int top_logprobs = 5;
  int max_attempts = 3;          // total tries per request
  double backoff_base_seconds = 1.0;
  int concurrency = 4;           // bound on in-flight requests
  std::string api_key_env = "DEBUNC_API_KEY";

  void validate() const;
};

/// Remote black-box backend: text plus top-k logprobs, no attention hooks.
/// Transport failures, HTTP 429 and 5xx responses are retried with
/// jittered exponential backoff (base delay doubling per attempt) up to
/// max_attempts, then surface as BackendError; a well-formed reply without
/// logprobs is a CapabilityError and is not retried.
class ApiBackend final : public backends::Backend {
 public:
  explicit ApiBackend(ApiConfig config);
  ~ApiBackend() override;

  backends::BackendCapabilities capabilities() const override;
  backends::AgentResponse generate(const backends::GenerationRequest& request) override;
  std::size_t count_tokens(std::string_view text) const override;

  /// Test hooks: replace the inter-retry sleep and the jitter source.
  void set_sleeper(std::function<void(double seconds)> sleeper);
  void set_jitter(std::function<double()> jitter);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace debunc::api
