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

#include "qgsynth/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <thread>

#include "qgsynth/error.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {

using nlohmann::json;

namespace {

json messages_json(const Prompt& prompt) {
  json messages = json::array();
  for (const auto& m : prompt.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  return messages;
}

json parse_or_malformed(std::string_view body, const char* what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformedPayload, std::string(what) + ": " + e.what());
  }
}

FinishReason finish_reason_from_string(std::string_view name) {
  if (name == "stop") return FinishReason::kStop;
  if (name == "length") return FinishReason::kLength;
  return FinishReason::kError;
}

json response_json(const CompletionResponse& r) {
  json out = {{"text", r.text},
              {"finish_reason", to_string(r.finish_reason)},
              {"usage",
               {{"prompt_tokens", r.usage.prompt_tokens},
                {"completion_tokens", r.usage.completion_tokens}}}};
  if (r.raw_provider_id) out["id"] = *r.raw_provider_id;
  return out;
}

CompletionResponse response_from_json(const json& j) {
  CompletionResponse r;
  r.text = j.at("text").get<std::string>();
  r.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
  r.usage.prompt_tokens = j.at("usage").value("prompt_tokens", 0);
  r.usage.completion_tokens = j.at("usage").value("completion_tokens", 0);
  if (j.contains("id")) r.raw_provider_id = j.at("id").get<std::string>();
  return r;
}

}  // namespace

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop: return "stop";
    case FinishReason::kLength: return "length";
    case FinishReason::kError: return "error";
  }
  return "error";
}

std::string chat_request_body(const CompletionRequest& request) {
  json body = {{"model", request.model_name},
               {"messages", messages_json(request.prompt)},
               {"temperature", request.temperature},
               {"top_p", request.top_p},
               {"max_tokens", request.max_output_tokens}};
  return body.dump();
}

std::string CompletionRequest::request_key() const {
  return sha256_hex("chat.v1\n" + chat_request_body(*this));
}

void CompletionRequest::validate() const {
  if (model_name.empty()) throw Error(ErrorKind::kArgument, "model_name must be set");
  if (prompt.messages.empty()) throw Error(ErrorKind::kArgument, "prompt has no messages");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::kArgument, "temperature must be non-negative");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw Error(ErrorKind::kArgument, "top_p must lie in (0,1]");
  }
  if (max_output_tokens <= 0) {
    throw Error(ErrorKind::kArgument, "max_output_tokens must be positive");
  }
}

CompletionResponse parse_chat_response(std::string_view body) {
  const json doc = parse_or_malformed(body, "chat completion");
  try {
    const json& choice = doc.at("choices").at(0);
    CompletionResponse r;
    const json& content = choice.at("message").at("content");
    r.text = content.is_null() ? std::string() : content.get<std::string>();
    r.finish_reason = finish_reason_from_string(choice.value("finish_reason", std::string("stop")));
    if (auto it = doc.find("usage"); it != doc.end() && it->is_object()) {
      r.usage.prompt_tokens = it->value("prompt_tokens", 0);
      r.usage.completion_tokens = it->value("completion_tokens", 0);
    }
    if (auto it = doc.find("id"); it != doc.end() && it->is_string()) {
      r.raw_provider_id = it->get<std::string>();
    }
    if (r.finish_reason == FinishReason::kStop && trim(r.text).empty()) {
      r.finish_reason = FinishReason::kError;
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedPayload, std::string("chat completion: ") + e.what());
  }
}

std::string logprob_request_body(std::string_view text, std::string_view model_name) {
  json body = {{"model", model_name}, {"prompt", text}, {"max_tokens", 0},
               {"echo", true},        {"logprobs", 0}};
  return body.dump();
}

TokenLogprobs parse_logprob_response(std::string_view body) {
  const json doc = parse_or_malformed(body, "logprobs");
  try {
    const json& lp = doc.at("choices").at(0).at("logprobs");
    const json& tokens = lp.at("tokens");
    const json& values = lp.at("token_logprobs");
    if (tokens.size() != values.size()) {
      throw Error(ErrorKind::kMalformedPayload, "logprobs: tokens/token_logprobs length mismatch");
    }
    TokenLogprobs out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      // The first echoed token has no conditional probability.
      if (values[i].is_null()) continue;
      const double value = values[i].get<double>();
      if (value > 0.0) {
        throw Error(ErrorKind::kMalformedPayload, "logprobs: positive log probability");
      }
      out.tokens.push_back(tokens[i].get<std::string>());
      out.logprobs.push_back(value);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedPayload, std::string("logprobs: ") + e.what());
  }
}

std::string qa_request_body(std::string_view context, std::string_view question) {
  return json{{"question", question}, {"context", context}}.dump();
}

QAProbeResult parse_qa_response(std::string_view body) {
  const json doc = parse_or_malformed(body, "qa");
  try {
    QAProbeResult r;
    const json& answer = doc.at("answer");
    r.predicted_span = answer.is_null() ? std::string() : answer.get<std::string>();
    r.confidence = std::clamp(doc.value("score", 0.0), 0.0, 1.0);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedPayload, std::string("qa: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  double delay = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt);
  delay = std::min(delay, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(delay));
}

bool is_retryable(ErrorKind kind) {
  return kind == ErrorKind::kRateLimited || kind == ErrorKind::kUnavailable;
}

TokenBucket::TokenBucket(double requests_per_minute, double burst, Sleeper sleeper,
                         SteadyClock clock)
    : rate_per_second_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::nanoseconds d) { std::this_thread::sleep_for(d); })),
      clock_(clock ? std::move(clock) : SteadyClock([] { return std::chrono::steady_clock::now(); })) {
  last_ = clock_();
}

void TokenBucket::acquire() {
  if (unlimited()) return;
  std::chrono::nanoseconds wait{0};
  {
    std::lock_guard lock(mutex_);
    const auto now = clock_();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_second_);
    tokens_ -= 1.0;
    if (tokens_ < 0.0) {
      wait = std::chrono::nanoseconds(
          static_cast<std::int64_t>(std::ceil(-tokens_ / rate_per_second_ * 1e9)));
    }
  }
  if (wait.count() > 0) sleeper_(wait);
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::optional<std::filesystem::path> directory)
    : directory_(std::move(directory)) {
  if (directory_) {
    std::error_code ec;
    std::filesystem::create_directories(*directory_, ec);
    if (ec) {
      throw Error(ErrorKind::kIo, "cannot create cache directory " + directory_->string());
    }
  }
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return *directory_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  if (!directory_) {
    std::lock_guard lock(mutex_);
    auto it = memory_.find(key);
    if (it == memory_.end()) return std::nullopt;
    return it->second;
  }
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

void ResponseCache::put(const std::string& key, const std::string& record) {
  if (!directory_) {
    std::lock_guard lock(mutex_);
    memory_[key] = record;
    return;
  }
  const auto path = path_for(key);
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, record);
}

// ---------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Endpoint> endpoint, GatewayOptions options)
    : endpoint_(std::move(endpoint)),
      options_(std::move(options)),
      cache_(options_.cache_dir),
      limiter_(options_.requests_per_minute, options_.burst, options_.sleeper) {
  if (!endpoint_) throw Error(ErrorKind::kArgument, "gateway requires an endpoint");
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::nanoseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::mutex& Gateway::key_mutex(const std::string& key) {
  std::lock_guard lock(key_mutexes_guard_);
  auto& slot = key_mutexes_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

template <typename Fn>
auto Gateway::with_retries(Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    ++backend_calls_;
    try {
      return fn();
    } catch (const Error& e) {
      if (!is_retryable(e.kind())) throw;
      if (attempt >= options_.retry.max_retries) {
        throw Error(e.kind(), std::string(e.what()) + " (gave up after " +
                                  std::to_string(attempt + 1) + " attempts)");
      }
      options_.sleeper(options_.retry.backoff(attempt));
    }
  }
}

template <typename Fn>
std::string Gateway::cached(const std::string& key, Fn&& produce) {
  if (!options_.cache_enabled) return produce();
  std::lock_guard lock(key_mutex(key));
  if (auto hit = cache_.get(key)) {
    ++cache_hits_;
    return *hit;
  }
  std::string record = produce();
  cache_.put(key, record);
  return record;
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  request.validate();
  const std::string key = request.request_key();
  const std::string record = cached(key, [&] {
    CompletionResponse response = with_retries([&] { return endpoint_->complete(request); });
    json stored = {{"kind", "completion"},
                   {"key", key},
                   {"request", json::parse(chat_request_body(request))},
                   {"response", response_json(response)}};
    return stored.dump();
  });
  try {
    return response_from_json(json::parse(record).at("response"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedPayload, "corrupt cache record " + key + ": " + e.what());
  }
}

TokenLogprobs Gateway::token_logprobs(std::string_view text, std::string_view model_name) {
  if (trim(text).empty()) {
    throw Error(ErrorKind::kArgument, "token_logprobs requires non-empty text");
  }
  const std::string key =
      sha256_hex("logprobs.v1\n" + std::string(model_name) + "\n" + std::string(text));
  const std::string record = cached(key, [&] {
    TokenLogprobs lp = with_retries([&] { return endpoint_->token_logprobs(text, model_name); });
    json stored = {{"kind", "logprobs"},
                   {"key", key},
                   {"request", {{"model", model_name}, {"text", text}}},
                   {"response", {{"tokens", lp.tokens}, {"logprobs", lp.logprobs}}}};
    return stored.dump();
  });
  try {
    const json response = json::parse(record).at("response");
    return {response.at("tokens").get<std::vector<std::string>>(),
            response.at("logprobs").get<std::vector<double>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedPayload, "corrupt cache record " + key + ": " + e.what());
  }
}

QAProbeResult Gateway::answer_question(std::string_view context, std::string_view question) {
  if (trim(context).empty() || trim(question).empty()) {
    throw Error(ErrorKind::kArgument, "answer_question requires non-empty context and question");
  }
  const std::string key =
      sha256_hex("qa.v1\n" + std::string(question) + "\n" + std::string(context));
  const std::string record = cached(key, [&] {
    QAProbeResult r = with_retries([&] { return endpoint_->answer_question(context, question); });
    json stored = {{"kind", "qa"},
                   {"key", key},
                   {"request", json::parse(qa_request_body(context, question))},
                   {"response", {{"answer", r.predicted_span}, {"score", r.confidence}}}};
    return stored.dump();
  });
  try {
    const json response = json::parse(record).at("response");
    return {response.at("answer").get<std::string>(), response.at("score").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedPayload, "corrupt cache record " + key + ": " + e.what());
  }
}

}  // namespace qgsynth
