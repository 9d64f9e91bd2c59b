// Copyright 2026 The qgsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgsynth/error.hpp"
#include "qgsynth/metrics.hpp"
#include "qgsynth/prompt.hpp"

namespace qgsynth {

struct CompletionRequest {
  std::string model_name;
  Prompt prompt;
  double temperature = 0.9;
  double top_p = 1.0;
  int max_output_tokens = 512;

  // SHA-256 over the canonical JSON of every other field.
  std::string request_key() const;
  // Validates ranges; throws Error(kArgument).
  void validate() const;
};

enum class FinishReason { kStop, kLength, kError };

std::string_view to_string(FinishReason reason);

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;

  friend bool operator==(const Usage&, const Usage&) = default;
};

struct CompletionResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  Usage usage;
  std::optional<std::string> raw_provider_id;

  friend bool operator==(const CompletionResponse&, const CompletionResponse&) = default;
};

struct QAProbeResult {
  std::string predicted_span;  // empty = no answer
  double confidence = 0.0;

  friend bool operator==(const QAProbeResult&, const QAProbeResult&) = default;
};

// Chat-completion request body: model, messages[{role, content}],
// temperature, top_p, max_tokens.
std::string chat_request_body(const CompletionRequest& request);
CompletionResponse parse_chat_response(std::string_view body);

// Echo-with-logprobs completion body and its tokens/token_logprobs reply.
std::string logprob_request_body(std::string_view text, std::string_view model_name);
TokenLogprobs parse_logprob_response(std::string_view body);

// Extractive QA: {question, context} -> {answer, score}.
std::string qa_request_body(std::string_view context, std::string_view question);
QAProbeResult parse_qa_response(std::string_view body);

// A backend reached over some transport. Implementations throw Error with
// kAuth, kRateLimited, kUnavailable, kMalformedPayload or kOverflow so the
// gateway can decide what to retry.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  virtual TokenLogprobs token_logprobs(std::string_view text, std::string_view model_name) = 0;
  virtual QAProbeResult answer_question(std::string_view context, std::string_view question) = 0;
  // Credential-free identity for manifests.
  virtual std::string describe() const = 0;
};

struct EndpointConfig {
  // "mock:[?responses=PATH&logprob=X&context_window=N]" or an http(s) base
  // URL such as "https://api.openai.com/v1".
  std::string url = "mock:";
  // Full URL of the extractive-QA service; defaults to <url>/qa.
  std::string qa_url;
  std::string api_key_env = "OPENAI_API_KEY";
  // Word-count ceiling for logprob scoring; longer texts fail with kOverflow.
  int max_context_tokens = 1024;
  std::chrono::seconds timeout{60};
};

std::shared_ptr<Endpoint> make_endpoint(const EndpointConfig& config);

// Number of HTTP requests issued by every HttpEndpoint in this process.
std::size_t http_requests_issued();

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  // Delay before retry number `attempt` (0-based); non-decreasing.
  std::chrono::milliseconds backoff(int attempt) const;
};

bool is_retryable(ErrorKind kind);

using Sleeper = std::function<void(std::chrono::nanoseconds)>;
using SteadyClock = std::function<std::chrono::steady_clock::time_point()>;

// Process-wide request pacing. Each acquire() reserves one token and sleeps
// until it becomes available.
class TokenBucket {
 public:
  TokenBucket(double requests_per_minute, double burst, Sleeper sleeper = {},
              SteadyClock clock = {});

  void acquire();
  bool unlimited() const noexcept { return rate_per_second_ <= 0.0; }

 private:
  double rate_per_second_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  Sleeper sleeper_;
  SteadyClock clock_;
  std::mutex mutex_;
};

// Content-addressed response store: one JSON record per key, either in a
// directory (persistent across runs) or in memory.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> directory = std::nullopt);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& record);

  const std::optional<std::filesystem::path>& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::optional<std::filesystem::path> directory_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> memory_;
};

struct GatewayOptions {
  bool cache_enabled = true;
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  double requests_per_minute = 0.0;  // 0 = unlimited
  double burst = 1.0;
  Sleeper sleeper;  // defaults to std::this_thread::sleep_for
};

// Caching, retrying, rate-limited front door to an Endpoint. Safe for
// concurrent use; concurrent misses on the same key are serialized so the
// endpoint sees one call.
class Gateway {
 public:
  Gateway(std::shared_ptr<Endpoint> endpoint, GatewayOptions options = {});

  CompletionResponse complete(const CompletionRequest& request);
  TokenLogprobs token_logprobs(std::string_view text, std::string_view model_name);
  QAProbeResult answer_question(std::string_view context, std::string_view question);

  // Calls forwarded to the endpoint, retries included.
  std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }
  const Endpoint& endpoint() const noexcept { return *endpoint_; }

 private:
  template <typename Fn>
  auto with_retries(Fn&& fn) -> decltype(fn());

  template <typename Fn>
  std::string cached(const std::string& key, Fn&& produce);

  std::mutex& key_mutex(const std::string& key);

  std::shared_ptr<Endpoint> endpoint_;
  GatewayOptions options_;
  ResponseCache cache_;
  TokenBucket limiter_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::mutex key_mutexes_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
};

}  // namespace qgsynth
