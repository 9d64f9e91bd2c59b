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

// Slow, obviously-correct reference computations used to cross-check the
// library metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qgsynth::testing {

using Words = std::vector<std::string>;

// Occurrences of seq[start, start+n) anywhere in `in`, by direct comparison.
inline std::size_t count_occurrences(const Words& in, const Words& seq, std::size_t start,
                                     std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + n <= in.size(); ++i) {
    bool equal = true;
    for (std::size_t k = 0; k < n && equal; ++k) equal = in[i + k] == seq[start + k];
    count += equal;
  }
  return count;
}

struct OracleBleuCounts {
  std::size_t matches[4] = {0, 0, 0, 0};
  std::size_t totals[4] = {0, 0, 0, 0};
  std::size_t c = 0;
  std::size_t r = 0;
};

inline OracleBleuCounts oracle_bleu_counts(const Words& cand, const std::vector<Words>& refs) {
  OracleBleuCounts out;
  out.c = cand.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    if (cand.size() < n) continue;
    out.totals[n - 1] = cand.size() - n + 1;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      // Only the first occurrence of each distinct n-gram contributes.
      bool seen = false;
      for (std::size_t j = 0; j < i && !seen; ++j) {
        seen = std::equal(cand.begin() + static_cast<long>(j),
                          cand.begin() + static_cast<long>(j + n),
                          cand.begin() + static_cast<long>(i));
      }
      if (seen) continue;
      const std::size_t in_cand = count_occurrences(cand, cand, i, n);
      std::size_t max_ref = 0;
      for (const auto& ref : refs) max_ref = std::max(max_ref, count_occurrences(ref, cand, i, n));
      out.matches[n - 1] += std::min(in_cand, max_ref);
    }
  }
  if (!refs.empty()) {
    std::size_t best = refs.front().size();
    for (const auto& ref : refs) {
      const auto d = [&](std::size_t len) { return len > out.c ? len - out.c : out.c - len; };
      if (d(ref.size()) < d(best) || (d(ref.size()) == d(best) && ref.size() < best)) {
        best = ref.size();
      }
    }
    out.r = best;
  }
  return out;
}

// smoothed=false gives the textbook unsmoothed BLEU.
inline double oracle_bleu(const OracleBleuCounts& k, bool smoothed = true) {
  if (k.c == 0 || k.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double p;
    if (k.matches[n] > 0) {
      p = static_cast<double>(k.matches[n]) / static_cast<double>(k.totals[n]);
    } else if (smoothed) {
      p = 1.0 / static_cast<double>(k.totals[n] + 1);
    } else {
      return 0.0;
    }
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (k.c < k.r) bp = std::exp(1.0 - static_cast<double>(k.r) / static_cast<double>(k.c));
  return bp * std::exp(log_sum / 4.0);
}

inline bool is_subsequence(const Words& sub, const Words& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i) j += of[i] == sub[j];
  return j == sub.size();
}

// Longest common subsequence by trying every subsequence of the shorter
// input (|shorter| <= 20 keeps this tractable).
inline std::size_t oracle_lcs(const Words& a, const Words& b) {
  const Words& s = a.size() <= b.size() ? a : b;
  const Words& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    const auto bits = static_cast<std::size_t>(__builtin_popcount(mask));
    if (bits <= best) continue;
    Words sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    if (is_subsequence(sub, t)) best = bits;
  }
  return best;
}

inline Words random_words(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  static const char* kVocab[] = {"the", "cat", "sat", "on", "mat", "dog", "ran", "a", "red", "big"};
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> word(0, std::min<std::size_t>(vocab, 10) - 1);
  Words out(len(rng));
  for (auto& w : out) w = kVocab[word(rng)];
  return out;
}

}  // namespace qgsynth::testing
