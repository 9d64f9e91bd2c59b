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
#include <map>
#include <string_view>
#include <vector>

#include "qgsynth/prompt.hpp"
#include "qgsynth/triplet.hpp"

namespace qgsynth {

enum class MixStrategy {
  kMonotonePrefix,  // one permutation per seed; flipped sets nest as fraction grows
  kIndependent,     // fresh permutation per fraction
};

std::string_view to_string(MixStrategy strategy);
MixStrategy mix_strategy_from_string(std::string_view name);

// Exactly round_half_up(fraction * n) pairs take the synthetic context.
// Output is sorted by pair_id.
std::vector<Triplet> mix(const std::vector<Triplet>& real, const std::vector<Triplet>& synthetic,
                         double fraction, std::uint64_t seed,
                         MixStrategy strategy = MixStrategy::kMonotonePrefix);

// Nested subsets, one per requested size.
std::map<std::size_t, std::vector<Triplet>> sweep_sizes(const std::vector<Triplet>& triplets,
                                                        const std::vector<std::size_t>& sizes,
                                                        std::uint64_t seed);

struct EmitReport {
  std::size_t count = 0;
  std::size_t truncated_count = 0;
};

// Training-set JSONL: {"input", "target", "meta": {"pair_id", "context_kind",
// "truncated"}}. Inputs longer than max_input_tokens whitespace tokens have
// their context cut at a word boundary. 0 disables the limit.
EmitReport emit_trainset(const std::vector<Triplet>& triplets, const StylePreset& style,
                         const std::filesystem::path& path, std::size_t max_input_tokens = 512);

}  // namespace qgsynth
