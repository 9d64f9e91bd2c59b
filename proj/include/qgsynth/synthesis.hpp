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

#include <cstddef>
#include <filesystem>
#include <limits>
#include <stop_token>
#include <string>
#include <vector>

#include "qgsynth/corpus.hpp"
#include "qgsynth/error.hpp"
#include "qgsynth/gateway.hpp"
#include "qgsynth/manifest.hpp"
#include "qgsynth/prompt.hpp"
#include "qgsynth/triplet.hpp"

namespace qgsynth {

struct LengthLimits {
  std::size_t min_words = 0;
  std::size_t max_words = std::numeric_limits<std::size_t>::max();
};

enum class ContainmentMode {
  kNormalized,  // SQuAD normalization, contiguous word match
  kRaw,         // exact substring
};

std::string_view to_string(ContainmentMode mode);
ContainmentMode containment_mode_from_string(std::string_view name);

bool contains_answer(std::string_view context, std::string_view answer, ContainmentMode mode);

struct ContextFlags {
  bool empty = false;
  bool too_short = false;
  bool too_long = false;
  bool contains_answer = false;
};

// Checks are advisory; nothing is rejected.
ContextFlags validate_context(std::string_view context, const std::vector<std::string>& answers,
                              LengthLimits limits = {},
                              ContainmentMode mode = ContainmentMode::kNormalized);

// Real-context triplets; throws kValidation listing every pair without one.
std::vector<Triplet> attach_real_contexts(const Corpus& corpus);

struct SynthesisOptions {
  PromptMode mode = PromptMode::kZeroShot;
  PromptLayout layout = PromptLayout::kChat;
  std::string model_name = "gpt-3.5-turbo";
  double temperature = 0.9;
  double top_p = 1.0;
  int max_output_tokens = 512;
  std::size_t parallelism = 4;
  // Abort once failures exceed this share of the pending pairs.
  double max_failure_rate = 0.10;
  std::filesystem::path output_path;
  std::stop_token stop;
};

struct SynthesisFailure {
  std::string pair_id;
  ErrorKind kind = ErrorKind::kUnavailable;
  std::string message;
};

struct SynthesisRun {
  std::size_t already_present = 0;
  std::size_t attempted = 0;
  std::size_t completed = 0;
  std::vector<SynthesisFailure> failed;
  bool interrupted = false;
  std::filesystem::path output_path;
  RunParameters parameters;  // hashed into a manifest by the caller
};

// Appends one JSON line per completed pair to options.output_path. Pairs
// already present there are skipped, so an interrupted run can be resumed.
SynthesisRun synthesize(const Corpus& corpus, const PromptPreset& preset, Gateway& gateway,
                        const SynthesisOptions& options);

std::string style_fingerprint(const PromptPreset& preset);

}  // namespace qgsynth
