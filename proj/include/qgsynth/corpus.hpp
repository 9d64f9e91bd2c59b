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
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qgsynth {

enum class Source { kSquad, kOsbio, kGeneric };

std::string_view to_string(Source source);
Source source_from_string(std::string_view name);

// One question with its gold answers and, when the dataset provides it, the
// passage it was asked about.
struct QAPair {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  std::optional<std::string> real_context;
  std::optional<std::string> title;
  Source source = Source::kGeneric;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct Provenance {
  std::string source_path;
  std::string content_hash;
  // SQuAD v2.0 items dropped because they are marked impossible.
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// An ordered, validated set of QA pairs. Immutable after construction.
class Corpus {
 public:
  Corpus() : Corpus(std::vector<QAPair>{}, std::string{}) {}
  // Validates every invariant (non-empty question/answers, unique ids) and
  // computes the content hash; throws Error(kValidation) on violations.
  explicit Corpus(std::vector<QAPair> pairs, std::string source_path = {});

  const std::vector<QAPair>& pairs() const noexcept { return pairs_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  Provenance& provenance() noexcept { return provenance_; }
  const std::string& content_hash() const noexcept { return provenance_.content_hash; }

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

 private:
  std::vector<QAPair> pairs_;
  Provenance provenance_;
};

// Canonical one-line JSON encoding of a pair; also the unit of the content hash.
std::string to_json_line(const QAPair& pair);

Corpus ingest_squad(const std::filesystem::path& path);

// One record per line: id?, question, answer | answers[], context?, title?,
// source?. Blank lines are ignored.
Corpus ingest_jsonl(const std::filesystem::path& path, Source source = Source::kGeneric);

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

struct Split {
  Corpus train;
  Corpus test;
};

// Seeded partition with |test| = round_half_up(test_fraction * n). Both halves
// keep the input order.
Split split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

// Uniform sample without replacement of n pairs; output keeps input order.
// Samples for the same seed are nested: sample(n1) is a subset of sample(n2)
// whenever n1 <= n2.
Corpus sample_subset(const Corpus& corpus, std::size_t n, std::uint64_t seed);

}  // namespace qgsynth
