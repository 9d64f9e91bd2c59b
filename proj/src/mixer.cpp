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

#include "qgsynth/mixer.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "qgsynth/error.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {
namespace {

std::vector<const Triplet*> sorted_by_id(const std::vector<Triplet>& triplets,
                                         std::string_view label) {
  std::vector<const Triplet*> out;
  out.reserve(triplets.size());
  for (const auto& t : triplets) out.push_back(&t);
  std::sort(out.begin(), out.end(),
            [](const Triplet* a, const Triplet* b) { return a->pair_id < b->pair_id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i]->pair_id == out[i - 1]->pair_id) {
      throw Error(ErrorKind::kValidation,
                  std::string(label) + ": duplicate pair_id " + out[i]->pair_id);
    }
  }
  return out;
}

std::string describe_ids(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 10;
  std::vector<std::string> shown(ids.begin(),
                                 ids.begin() + static_cast<long>(std::min(ids.size(), kShown)));
  std::string s = join(shown, ", ");
  if (ids.size() > kShown) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

// Byte offset just past the k-th whitespace-delimited word.
std::size_t cut_after_words(std::string_view text, std::size_t k) {
  std::size_t i = 0;
  std::size_t words = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == text.size()) break;
    if (words == k) return i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    ++words;
  }
  return text.size();
}

}  // namespace

std::string_view to_string(MixStrategy strategy) {
  return strategy == MixStrategy::kIndependent ? "independent" : "monotone_prefix";
}

MixStrategy mix_strategy_from_string(std::string_view name) {
  if (name == "monotone_prefix") return MixStrategy::kMonotonePrefix;
  if (name == "independent") return MixStrategy::kIndependent;
  throw Error(ErrorKind::kArgument, "unknown mix strategy '" + std::string(name) +
                                        "' (expected monotone_prefix|independent)");
}

std::vector<Triplet> mix(const std::vector<Triplet>& real, const std::vector<Triplet>& synthetic,
                         double fraction, std::uint64_t seed, MixStrategy strategy) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kArgument, "mix: fraction must lie in [0, 1]");
  }
  const auto r = sorted_by_id(real, "real");
  const auto s = sorted_by_id(synthetic, "synthetic");

  std::vector<std::string> only_real;
  std::vector<std::string> only_synthetic;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < r.size() || j < s.size()) {
    if (j == s.size() || (i < r.size() && r[i]->pair_id < s[j]->pair_id)) {
      only_real.push_back(r[i++]->pair_id);
    } else if (i == r.size() || s[j]->pair_id < r[i]->pair_id) {
      only_synthetic.push_back(s[j++]->pair_id);
    } else {
      ++i;
      ++j;
    }
  }
  if (!only_real.empty() || !only_synthetic.empty()) {
    std::string msg = "mix: pair_id sets differ";
    if (!only_real.empty()) msg += "; only in real: " + describe_ids(only_real);
    if (!only_synthetic.empty()) msg += "; only in synthetic: " + describe_ids(only_synthetic);
    throw Error(ErrorKind::kMismatch, msg);
  }

  const std::size_t n = r.size();
  const std::size_t k = std::min(n, round_half_up(fraction * static_cast<double>(n)));
  std::uint64_t perm_seed = seed;
  if (strategy == MixStrategy::kIndependent) {
    perm_seed = derive_seed(seed, "fraction=" + std::to_string(k) + "/" + std::to_string(n));
  }
  const auto perm = seeded_permutation(n, perm_seed);
  std::vector<bool> flip(n, false);
  for (std::size_t p = 0; p < k; ++p) flip[perm[p]] = true;

  std::vector<Triplet> out;
  out.reserve(n);
  for (std::size_t p = 0; p < n; ++p) out.push_back(flip[p] ? *s[p] : *r[p]);
  return out;
}

std::map<std::size_t, std::vector<Triplet>> sweep_sizes(const std::vector<Triplet>& triplets,
                                                        const std::vector<std::size_t>& sizes,
                                                        std::uint64_t seed) {
  const auto sorted = sorted_by_id(triplets, "sweep");
  const std::size_t n = sorted.size();
  for (auto size : sizes) {
    if (size == 0 || size > n) {
      throw Error(ErrorKind::kArgument, "sweep: size " + std::to_string(size) +
                                            " outside 1.." + std::to_string(n));
    }
  }
  const auto perm = seeded_permutation(n, seed);
  std::map<std::size_t, std::vector<Triplet>> out;
  for (auto size : sizes) {
    std::vector<std::size_t> chosen(perm.begin(), perm.begin() + static_cast<long>(size));
    std::sort(chosen.begin(), chosen.end());
    auto& subset = out[size];
    subset.reserve(size);
    for (auto idx : chosen) subset.push_back(*sorted[idx]);
  }
  return out;
}

EmitReport emit_trainset(const std::vector<Triplet>& triplets, const StylePreset& style,
                         const std::filesystem::path& path, std::size_t max_input_tokens) {
  EmitReport report;
  std::string body;
  for (const auto& t : triplets) {
    TrainingText text = render_training_input(t, style);
    bool truncated = false;
    if (max_input_tokens > 0 && split_whitespace(text.input_text).size() > max_input_tokens) {
      Triplet stripped = t;
      stripped.context = "x";
      const std::size_t overhead =
          split_whitespace(render_training_input(stripped, style).input_text).size() - 1;
      // At least one context word survives so the record stays well-formed.
      const std::size_t keep =
          max_input_tokens > overhead + 1 ? max_input_tokens - overhead : 1;
      stripped.context = t.context.substr(0, cut_after_words(t.context, keep));
      stripped.context = std::string(trim(stripped.context));
      text = render_training_input(stripped, style);
      truncated = true;
      ++report.truncated_count;
    }
    nlohmann::json record = {
        {"input", text.input_text},
        {"target", text.target_text},
        {"meta",
         {{"pair_id", t.pair_id},
          {"context_kind", std::string(to_string(t.context_kind))},
          {"truncated", truncated}}},
    };
    body += record.dump() + "\n";
    ++report.count;
  }
  write_file_atomic(path, body);
  return report;
}

}  // namespace qgsynth
