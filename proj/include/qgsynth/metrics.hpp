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

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qgsynth {

// Token sequence produced by the canonical tokenizer: NFC, lowercased,
// whitespace-split, with every punctuation code point a token of its own.
class TokenSeq {
 public:
  TokenSeq() = default;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
  friend TokenSeq tokenize(std::string_view text);

 private:
  explicit TokenSeq(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {}
  std::vector<std::string> tokens_;
};

TokenSeq tokenize(std::string_view text);

// True when every code point of the token is Unicode punctuation.
bool is_punctuation_token(std::string_view token);

// Number of non-punctuation tokens.
std::size_t word_count(std::string_view text);

// ---------------------------------------------------------------------------
// BLEU-4

// Sufficient statistics for BLEU; pooled by summation for corpus scores.
struct BleuStats {
  std::array<std::size_t, 4> matches{};  // clipped n-gram matches, n = 1..4
  std::array<std::size_t, 4> totals{};   // candidate n-gram counts
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;      // closest reference length

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const TokenSeq& candidate, std::span<const TokenSeq> references);

// Geometric mean of the four modified precisions times the brevity penalty.
// For n >= 2 a zero match count is smoothed to (0 + 1) / (total + 1).
double bleu_from_stats(const BleuStats& stats);

double bleu4(const TokenSeq& candidate, std::span<const TokenSeq> references);

// ---------------------------------------------------------------------------
// ROUGE-L

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);
RougeL rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// ---------------------------------------------------------------------------
// METEOR (exact + Porter-stem stages, no synonym module)

struct MeteorAlignment {
  // (candidate index, reference index), sorted by candidate index.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::size_t chunks = 0;
};

MeteorAlignment meteor_align(const TokenSeq& candidate, const TokenSeq& reference);

// F_mean * (1 - 0.5 * (chunks / matches)^3) with F_mean = 10PR / (R + 9P).
double meteor_from_counts(std::size_t matches, std::size_t candidate_length,
                          std::size_t reference_length, std::size_t chunks);

double meteor_lite(const TokenSeq& candidate, const TokenSeq& reference);

// ---------------------------------------------------------------------------
// SQuAD answer matching

// Lowercase, drop punctuation, drop the articles a/an/the, collapse whitespace.
std::string squad_normalize(std::string_view text);

// True when the normalized phrase occurs as a contiguous run of words in the
// normalized text. An empty normalized phrase never matches.
bool contains_normalized(std::string_view text, std::string_view phrase);

int squad_em(std::string_view prediction, std::span<const std::string> golds);
double squad_f1(std::string_view prediction, std::span<const std::string> golds);

// ---------------------------------------------------------------------------
// Perplexity

struct TokenLogprobs {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;

  friend bool operator==(const TokenLogprobs&, const TokenLogprobs&) = default;
};

// exp(-mean(logprobs)); throws Error(kArgument) on empty input.
double perplexity(std::span<const double> logprobs);
double perplexity(const TokenLogprobs& lp);

// ---------------------------------------------------------------------------
// Corpus scoring

struct Prediction {
  std::string pair_id;
  std::string text;
};

struct GoldQuestion {
  std::string pair_id;
  std::string question;
};

struct ExampleScores {
  std::string pair_id;
  double bleu4 = 0.0;
  double rouge_l_f = 0.0;
  double meteor = 0.0;
  int em = 0;
  double f1 = 0.0;
  std::optional<double> external;
};

struct CorpusScores {
  double bleu4 = 0.0;  // pooled n-gram counts
  double meteor = 0.0;
  double rouge_l = 0.0;
  double em_rate = 0.0;
  double mean_f1 = 0.0;
  std::optional<double> external;
};

struct MetricReport {
  std::vector<ExampleScores> per_example;
  CorpusScores corpus;
  std::size_t n = 0;
};

// Scores each prediction against the gold question with the same pair_id.
// Per-example rows follow the order of `golds`. Throws Error(kMismatch) when
// the id sets differ. `external` (e.g. a learned metric computed elsewhere)
// is merged per example and averaged; every gold id must be present in it.
MetricReport score_corpus(std::span<const Prediction> predictions,
                          std::span<const GoldQuestion> golds,
                          const std::map<std::string, double>* external = nullptr);

std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// Accepts triplet files ({pair_id, question, ...}) and corpus files
// ({id, question, ...}).
std::vector<GoldQuestion> read_gold_questions(const std::filesystem::path& path);

// JSON object {pair_id: score}.
std::map<std::string, double> read_external_scores(const std::filesystem::path& path);

std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(std::string_view json_text);
void write_report_json(const MetricReport& report, const std::filesystem::path& path);
MetricReport read_report_json(const std::filesystem::path& path);

// One row per example plus a trailing summary row with pair_id "__corpus__".
void write_report_csv(const MetricReport& report, const std::filesystem::path& path);

}  // namespace qgsynth
