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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qgsynth/error.hpp"
#include "qgsynth/gateway.hpp"
#include "qgsynth/synthesis.hpp"
#include "qgsynth/triplet.hpp"

namespace qgsynth {

struct Histogram {
  std::string label;
  std::vector<double> bin_edges;  // counts.size() + 1 entries
  std::vector<std::size_t> counts;
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
};

// Fixed-width bins spanning [min, max]; the last bin is closed.
Histogram make_histogram(std::vector<double> values, std::size_t bins, std::string label = {});

// Word counts exclude punctuation tokens.
Histogram length_stats(const std::vector<Triplet>& triplets, std::size_t bins = 20);

struct ContextFailure {
  std::string pair_id;
  ErrorKind kind = ErrorKind::kUnavailable;
  std::string message;
};

struct PerplexitySeries {
  ContextKind kind = ContextKind::kReal;
  Histogram histogram;
  std::vector<std::pair<std::string, double>> values;  // pair_id, perplexity
};

struct PerplexityReport {
  std::vector<PerplexitySeries> series;  // one per context kind present
  std::vector<ContextFailure> errors;
};

PerplexityReport perplexity_stats(const std::vector<Triplet>& triplets, Gateway& gateway,
                                  std::string_view scorer_model, std::size_t bins = 20,
                                  std::size_t parallelism = 4);

struct ContainmentResult {
  double rate = 0.0;
  std::size_t hits = 0;
  std::size_t n = 0;
  std::vector<std::string> misses;
};

ContainmentResult containment_rate(const std::vector<Triplet>& triplets,
                                   ContainmentMode mode = ContainmentMode::kNormalized);

struct ProbeExample {
  std::string pair_id;
  std::string predicted;
  int em = 0;
  double f1 = 0.0;
  std::optional<ContextFailure> skipped;
};

struct QAProbeReport {
  double em_rate = 0.0;
  double mean_f1 = 0.0;
  std::size_t n = 0;  // answered examples
  std::size_t skips = 0;
  std::vector<ProbeExample> per_example;  // input order
};

QAProbeReport qa_probe(const std::vector<Triplet>& triplets, Gateway& gateway,
                       std::size_t parallelism = 4);

struct ReviewCase {
  std::string pair_id;
  std::string question;
  std::vector<std::string> answers;
  std::string context;
  std::string probe_answer;
};

// Seeded sample of at most `cap` cases, rows ordered by pair_id. Returns the
// number of rows written.
std::size_t review_worksheet(const std::vector<ReviewCase>& cases,
                             const std::filesystem::path& path, std::size_t cap = 100,
                             std::uint64_t seed = 0);

struct QualitySummary {
  std::optional<double> containment_rate;
  std::optional<double> em_rate;
  std::optional<double> mean_f1;
  std::size_t n = 0;
  std::size_t skips = 0;
};

std::string histograms_to_json(const std::vector<Histogram>& histograms);
void write_histograms(const std::vector<Histogram>& histograms, const std::filesystem::path& path);
void write_quality_summary(const QualitySummary& summary, const std::filesystem::path& path);

}  // namespace qgsynth
