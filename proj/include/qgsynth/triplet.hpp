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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgsynth/prompt.hpp"

namespace qgsynth {

enum class ContextKind { kReal, kSyntheticZero, kSyntheticFew };

std::string_view to_string(ContextKind kind);
ContextKind context_kind_from_string(std::string_view name);
bool is_synthetic(ContextKind kind);

// Everything needed to audit and re-derive a generated context.
struct GenerationMeta {
  std::string model_name;
  std::string request_key;
  std::string timestamp;  // excluded from canonical hashes
  std::string prompt_snapshot_hash;
  std::vector<Message> prompt;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_output_tokens = 0;
  std::string finish_reason;
  // Set when the endpoint stopped at its token limit.
  bool too_long_risk = false;

  friend bool operator==(const GenerationMeta&, const GenerationMeta&) = default;
};

struct Triplet {
  std::string pair_id;
  std::string question;
  std::string answer;
  std::string context;
  ContextKind context_kind = ContextKind::kReal;
  std::optional<GenerationMeta> gen_meta;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Throws Error(kValidation) when the kind/meta invariants or non-empty
// context do not hold.
void validate_triplet(const Triplet& triplet);

// One JSON object per line. `with_timestamp = false` yields the canonical
// form used for hashing.
std::string to_json_line(const Triplet& triplet, bool with_timestamp = true);
Triplet triplet_from_json_line(std::string_view line);

// Reads a triplet JSONL file and returns records sorted by pair_id. A
// trailing partial line (no newline, unparsable) from an interrupted writer
// is ignored; any other bad line is an error.
std::vector<Triplet> read_triplets(const std::filesystem::path& path);

void write_triplets(const std::vector<Triplet>& triplets, const std::filesystem::path& path);

// SHA-256 over the canonical (timestamp-free, pair_id-sorted) encoding.
std::string canonical_hash(std::vector<Triplet> triplets);
std::string canonical_file_hash(const std::filesystem::path& path);

}  // namespace qgsynth
