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
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "qgsynth/error.hpp"
#include "qgsynth/gateway.hpp"

namespace qgsynth {

// In-process endpoint for offline runs and tests.
//
// Completions: canned text by request key, else the responder if set, else
// a deterministic echo of the last prompt message. Logprobs: whitespace
// tokens with a uniform logprob (default -ln 2) unless a per-text override
// exists. QA: returns the canned answer for a question when it occurs in the
// context, otherwise the empty span.
class MockEndpoint : public Endpoint {
 public:
  using Responder = std::function<CompletionResponse(const CompletionRequest&)>;

  MockEndpoint();

  CompletionResponse complete(const CompletionRequest& request) override;
  TokenLogprobs token_logprobs(std::string_view text, std::string_view model_name) override;
  QAProbeResult answer_question(std::string_view context, std::string_view question) override;
  std::string describe() const override { return "mock:"; }

  void set_canned(std::string request_key, std::string text);
  void set_responder(Responder responder);
  void set_uniform_logprob(double value);
  void set_logprobs(std::string text, std::vector<double> logprobs);
  void set_qa_answer(std::string question, std::string answer);
  void set_context_window(int tokens);
  // The next `count` calls of any kind throw Error(kind) before doing work.
  void fail_next(int count, ErrorKind kind);

  std::size_t calls() const noexcept { return calls_.load(); }

  // Applies "mock:?responses=PATH&logprob=X&context_window=N". The responses
  // file is JSON {"completions": {key|"*": text}, "qa": {question: answer}}.
  void configure_from_url(std::string_view url);

 private:
  void maybe_fail();

  mutable std::mutex mutex_;
  std::map<std::string, std::string> canned_;
  Responder responder_;
  double uniform_logprob_;
  std::map<std::string, std::vector<double>> logprob_overrides_;
  std::map<std::string, std::string> qa_answers_;
  int context_window_ = 1024;
  int failures_left_ = 0;
  ErrorKind failure_kind_ = ErrorKind::kUnavailable;
  std::atomic<std::size_t> calls_{0};
};

// OpenAI-compatible HTTP endpoint. The bearer credential is read from the
// configured environment variable at request time and never logged.
class HttpEndpoint : public Endpoint {
 public:
  explicit HttpEndpoint(EndpointConfig config);

  CompletionResponse complete(const CompletionRequest& request) override;
  TokenLogprobs token_logprobs(std::string_view text, std::string_view model_name) override;
  QAProbeResult answer_question(std::string_view context, std::string_view question) override;
  std::string describe() const override;

 private:
  std::string post(const std::string& url, const std::string& body) const;

  EndpointConfig config_;
};

}  // namespace qgsynth
