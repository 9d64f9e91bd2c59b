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

#include "qgsynth/endpoints.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <regex>

#include "qgsynth/text.hpp"

namespace qgsynth {

using nlohmann::json;

namespace {

std::atomic<std::size_t> g_http_requests{0};

std::map<std::string, std::string> parse_query(std::string_view url) {
  std::map<std::string, std::string> params;
  const auto q = url.find('?');
  if (q == std::string_view::npos) return params;
  for (const auto& item : split(url.substr(q + 1), '&')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      params[item] = "";
    } else {
      params[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  return params;
}

int word_tokens(std::string_view text) {
  return static_cast<int>(split_whitespace(text).size());
}

}  // namespace

std::size_t http_requests_issued() { return g_http_requests.load(); }

// ---------------------------------------------------------------------------
// MockEndpoint

MockEndpoint::MockEndpoint() : uniform_logprob_(-std::log(2.0)) {}

void MockEndpoint::maybe_fail() {
  ++calls_;
  std::lock_guard lock(mutex_);
  if (failures_left_ > 0) {
    --failures_left_;
    throw Error(failure_kind_, "mock: injected failure");
  }
}

CompletionResponse MockEndpoint::complete(const CompletionRequest& request) {
  maybe_fail();
  Responder responder;
  {
    std::lock_guard lock(mutex_);
    auto it = canned_.find(request.request_key());
    if (it == canned_.end()) it = canned_.find("*");
    if (it != canned_.end()) {
      CompletionResponse r;
      r.text = it->second;
      r.usage.completion_tokens = word_tokens(r.text);
      r.raw_provider_id = "mock";
      return r;
    }
    responder = responder_;
  }
  if (responder) return responder(request);

  std::string last = request.prompt.messages.empty() ? std::string()
                                                     : request.prompt.messages.back().text;
  std::replace(last.begin(), last.end(), '\n', ' ');
  CompletionResponse r;
  r.text = "Mock context. " + last;
  r.usage.prompt_tokens = word_tokens(request.prompt.text());
  r.usage.completion_tokens = word_tokens(r.text);
  r.raw_provider_id = "mock";
  return r;
}

TokenLogprobs MockEndpoint::token_logprobs(std::string_view text, std::string_view) {
  maybe_fail();
  std::lock_guard lock(mutex_);
  TokenLogprobs out;
  out.tokens = split_whitespace(text);
  if (static_cast<int>(out.tokens.size()) > context_window_) {
    throw Error(ErrorKind::kOverflow, "mock: text of " + std::to_string(out.tokens.size()) +
                                          " tokens exceeds context window of " +
                                          std::to_string(context_window_));
  }
  if (auto it = logprob_overrides_.find(std::string(text)); it != logprob_overrides_.end()) {
    out.logprobs = it->second;
    out.tokens.resize(out.logprobs.size());
  } else {
    out.logprobs.assign(out.tokens.size(), uniform_logprob_);
  }
  return out;
}

QAProbeResult MockEndpoint::answer_question(std::string_view context, std::string_view question) {
  maybe_fail();
  std::lock_guard lock(mutex_);
  auto it = qa_answers_.find(std::string(question));
  if (it != qa_answers_.end() && !it->second.empty()) {
    const auto pos = context.find(it->second);
    if (pos != std::string_view::npos) {
      return {std::string(context.substr(pos, it->second.size())), 1.0};
    }
  }
  return {"", 0.0};
}

void MockEndpoint::set_canned(std::string request_key, std::string text) {
  std::lock_guard lock(mutex_);
  canned_[std::move(request_key)] = std::move(text);
}

void MockEndpoint::set_responder(Responder responder) {
  std::lock_guard lock(mutex_);
  responder_ = std::move(responder);
}

void MockEndpoint::set_uniform_logprob(double value) {
  std::lock_guard lock(mutex_);
  uniform_logprob_ = value;
}

void MockEndpoint::set_logprobs(std::string text, std::vector<double> logprobs) {
  std::lock_guard lock(mutex_);
  logprob_overrides_[std::move(text)] = std::move(logprobs);
}

void MockEndpoint::set_qa_answer(std::string question, std::string answer) {
  std::lock_guard lock(mutex_);
  qa_answers_[std::move(question)] = std::move(answer);
}

void MockEndpoint::set_context_window(int tokens) {
  std::lock_guard lock(mutex_);
  context_window_ = tokens;
}

void MockEndpoint::fail_next(int count, ErrorKind kind) {
  std::lock_guard lock(mutex_);
  failures_left_ = count;
  failure_kind_ = kind;
}

void MockEndpoint::configure_from_url(std::string_view url) {
  const auto params = parse_query(url);
  if (auto it = params.find("logprob"); it != params.end()) {
    set_uniform_logprob(std::stod(it->second));
  }
  if (auto it = params.find("context_window"); it != params.end()) {
    set_context_window(std::stoi(it->second));
  }
  if (auto it = params.find("responses"); it != params.end()) {
    json doc;
    try {
      doc = json::parse(read_file(it->second));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, it->second + ": " + e.what());
    }
    for (const auto& [key, text] : doc.value("completions", json::object()).items()) {
      set_canned(key, text.get<std::string>());
    }
    for (const auto& [question, answer] : doc.value("qa", json::object()).items()) {
      set_qa_answer(question, answer.get<std::string>());
    }
  }
}

// ---------------------------------------------------------------------------
// HttpEndpoint

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // may be empty
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/?#]+)([^?#]*)$)");
  std::smatch match;
  if (!std::regex_match(url, match, pattern)) {
    throw Error(ErrorKind::kArgument, "unsupported endpoint URL '" + url + "'");
  }
  std::string path = match[2].str();
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {match[1].str(), path};
}

}  // namespace

HttpEndpoint::HttpEndpoint(EndpointConfig config) : config_(std::move(config)) {
  parse_url(config_.url);
  if (config_.qa_url.empty()) config_.qa_url = config_.url + "/qa";
  parse_url(config_.qa_url);
}

std::string HttpEndpoint::describe() const { return config_.url; }

std::string HttpEndpoint::post(const std::string& url, const std::string& body) const {
  const ParsedUrl target = parse_url(url);
  httplib::Client client(target.origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  ++g_http_requests;
  auto result = client.Post(target.path.empty() ? "/" : target.path, headers, body,
                            "application/json");
  if (!result) {
    throw Error(ErrorKind::kUnavailable,
                "POST " + url + " failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status >= 200 && status < 300) return result->body;

  const std::string summary = "POST " + url + " returned HTTP " + std::to_string(status);
  if (status == 401 || status == 403) throw Error(ErrorKind::kAuth, summary);
  if (status == 429) throw Error(ErrorKind::kRateLimited, summary);
  if (status == 408 || status >= 500) throw Error(ErrorKind::kUnavailable, summary);
  if ((status == 400 || status == 413) &&
      (result->body.find("context_length") != std::string::npos ||
       result->body.find("maximum context length") != std::string::npos)) {
    throw Error(ErrorKind::kOverflow, summary + ": input exceeds the model context window");
  }
  throw Error(ErrorKind::kArgument, summary + ": request rejected");
}

CompletionResponse HttpEndpoint::complete(const CompletionRequest& request) {
  return parse_chat_response(post(config_.url + "/chat/completions", chat_request_body(request)));
}

TokenLogprobs HttpEndpoint::token_logprobs(std::string_view text, std::string_view model_name) {
  // Words never outnumber subword tokens, so this check has no false alarms.
  const int words = word_tokens(text);
  if (words > config_.max_context_tokens) {
    throw Error(ErrorKind::kOverflow, "text of " + std::to_string(words) +
                                          " words exceeds context window of " +
                                          std::to_string(config_.max_context_tokens));
  }
  return parse_logprob_response(
      post(config_.url + "/completions", logprob_request_body(text, model_name)));
}

QAProbeResult HttpEndpoint::answer_question(std::string_view context, std::string_view question) {
  QAProbeResult r = parse_qa_response(post(config_.qa_url, qa_request_body(context, question)));
  if (!r.predicted_span.empty() && context.find(r.predicted_span) == std::string_view::npos) {
    throw Error(ErrorKind::kMalformedPayload, "qa: predicted span is not a substring of the context");
  }
  return r;
}

// ---------------------------------------------------------------------------

std::shared_ptr<Endpoint> make_endpoint(const EndpointConfig& config) {
  if (config.url.starts_with("mock:")) {
    auto mock = std::make_shared<MockEndpoint>();
    mock->set_context_window(config.max_context_tokens);
    mock->configure_from_url(config.url);
    return mock;
  }
  return std::make_shared<HttpEndpoint>(config);
}

}  // namespace qgsynth
