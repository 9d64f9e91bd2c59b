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

#include "qgsynth/metrics.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>

#include "qgsynth/csv.hpp"
#include "qgsynth/error.hpp"
#include "qgsynth/stemmer.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_code_point(std::string_view text, Fn&& fn) {
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(text.data(), i, length, c);
    fn(c, text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
}

bool is_squad_punct(UChar32 c) {
  // ASCII string.punctuation plus Unicode P* categories.
  if (c >= 0 && c < 128) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
           (c >= 123 && c <= 126);
  }
  return c >= 0 && u_ispunct(c);
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  const std::string normalized = nfc(to_lower(nfc(text)));
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for_each_code_point(normalized, [&](UChar32 c, std::string_view bytes) {
    if (c >= 0 && u_isUWhiteSpace(c)) {
      flush();
    } else if (c >= 0 && u_ispunct(c)) {
      flush();
      tokens.emplace_back(bytes);
    } else {
      current.append(bytes);
    }
  });
  flush();
  return TokenSeq(std::move(tokens));
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  bool all = true;
  for_each_code_point(token, [&](UChar32 c, std::string_view) {
    if (c < 0 || !u_ispunct(c)) all = false;
  });
  return all;
}

std::size_t word_count(std::string_view text) {
  const TokenSeq tokens = tokenize(text);
  return static_cast<std::size_t>(std::count_if(
      tokens.begin(), tokens.end(), [](const std::string& t) { return !is_punctuation_token(t); }));
}

// ---------------------------------------------------------------------------
// BLEU

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& seq, std::size_t n) {
  NgramCounts counts;
  const auto& tokens = seq.tokens();
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

BleuStats bleu_stats(const TokenSeq& candidate, std::span<const TokenSeq> references) {
  BleuStats stats;
  stats.candidate_length = candidate.size();
  if (!references.empty()) {
    std::size_t best = references.front().size();
    for (const auto& ref : references) {
      const auto diff = [&](std::size_t len) {
        return len > candidate.size() ? len - candidate.size() : candidate.size() - len;
      };
      if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) {
        best = ref.size();
      }
    }
    stats.reference_length = best;
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : count_ngrams(ref, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats) {
  if (stats.candidate_length == 0 || stats.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double precision;
    if (stats.matches[n] > 0) {
      precision = static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    } else {
      precision = 1.0 / static_cast<double>(stats.totals[n] + 1);
    }
    log_sum += std::log(precision);
  }
  double score = std::exp(log_sum / 4.0);
  if (stats.candidate_length < stats.reference_length) {
    score *= std::exp(1.0 - static_cast<double>(stats.reference_length) /
                                static_cast<double>(stats.candidate_length));
  }
  return score;
}

double bleu4(const TokenSeq& candidate, std::span<const TokenSeq> references) {
  return bleu_from_stats(bleu_stats(candidate, references));
}

// ---------------------------------------------------------------------------
// ROUGE-L

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeL rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  RougeL out;
  if (candidate.empty() || reference.empty()) return out;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return out;
  out.precision = lcs / static_cast<double>(candidate.size());
  out.recall = lcs / static_cast<double>(reference.size());
  out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

// ---------------------------------------------------------------------------
// METEOR

namespace {

// Exhaustive branch-and-bound over one matching stage: maximise the number
// of new matches, then minimise crossings against every match so far.
class StageAligner {
 public:
  using Match = std::pair<std::size_t, std::size_t>;

  StageAligner(std::vector<std::vector<std::size_t>> options, std::vector<Match> fixed,
               std::size_t target)
      : options_(std::move(options)), fixed_(std::move(fixed)), target_(target) {
    for (std::size_t i = 0; i < options_.size(); ++i) {
      if (!options_[i].empty()) positions_.push_back(i);
    }
  }

  std::vector<Match> solve() {
    if (target_ == 0) return {};
    current_ = fixed_;
    search(0, 0, 0);
    return std::vector<Match>(best_.begin() + static_cast<std::ptrdiff_t>(fixed_.size()),
                              best_.end());
  }

 private:
  static constexpr std::size_t kNodeBudget = 200000;

  std::size_t crossings_with(const Match& m) const {
    std::size_t n = 0;
    for (const auto& other : current_) {
      if ((other.first < m.first) != (other.second < m.second)) ++n;
    }
    return n;
  }

  bool ref_used(std::size_t j) const {
    return std::any_of(current_.begin(), current_.end(),
                       [j](const Match& m) { return m.second == j; });
  }

  void search(std::size_t idx, std::size_t added, std::size_t crossings) {
    ++nodes_;
    if (have_best_ && crossings >= best_crossings_) return;
    if (added + (positions_.size() - idx) < target_) return;
    if (added == target_) {
      best_ = current_;
      best_crossings_ = crossings;
      have_best_ = true;
      return;
    }
    if (idx == positions_.size()) return;
    if (have_best_ && nodes_ > kNodeBudget) return;

    const std::size_t i = positions_[idx];
    for (std::size_t j : options_[i]) {
      if (ref_used(j)) continue;
      const Match m{i, j};
      const std::size_t extra = crossings_with(m);
      current_.push_back(m);
      search(idx + 1, added + 1, crossings + extra);
      current_.pop_back();
    }
    search(idx + 1, added, crossings);
  }

  std::vector<std::vector<std::size_t>> options_;
  std::vector<Match> fixed_;
  std::size_t target_;
  std::vector<std::size_t> positions_;
  std::vector<Match> current_;
  std::vector<Match> best_;
  std::size_t best_crossings_ = 0;
  bool have_best_ = false;
  std::size_t nodes_ = 0;
};

// Maximum matching size when compatibility is an equivalence relation:
// sum over classes of min(candidate count, reference count).
std::size_t class_matching_size(const std::vector<std::string>& cand_keys,
                                const std::vector<std::string>& ref_keys) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& k : cand_keys) {
    if (!k.empty()) ++counts[k].first;
  }
  for (const auto& k : ref_keys) {
    if (!k.empty()) ++counts[k].second;
  }
  std::size_t total = 0;
  for (const auto& [key, c] : counts) total += std::min(c.first, c.second);
  return total;
}

std::vector<StageAligner::Match> run_stage(const std::vector<std::string>& cand_keys,
                                           const std::vector<std::string>& ref_keys,
                                           const std::vector<StageAligner::Match>& fixed) {
  std::vector<std::vector<std::size_t>> options(cand_keys.size());
  for (std::size_t i = 0; i < cand_keys.size(); ++i) {
    if (cand_keys[i].empty()) continue;
    for (std::size_t j = 0; j < ref_keys.size(); ++j) {
      if (cand_keys[i] == ref_keys[j]) options[i].push_back(j);
    }
  }
  const std::size_t target = class_matching_size(cand_keys, ref_keys);
  return StageAligner(std::move(options), fixed, target).solve();
}

}  // namespace

MeteorAlignment meteor_align(const TokenSeq& candidate, const TokenSeq& reference) {
  std::vector<StageAligner::Match> matches;
  std::vector<bool> cand_used(candidate.size(), false);
  std::vector<bool> ref_used(reference.size(), false);

  // Empty key marks a token already aligned in an earlier stage.
  auto stage = [&](auto key_of) {
    std::vector<std::string> cand_keys(candidate.size());
    std::vector<std::string> ref_keys(reference.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (!cand_used[i]) cand_keys[i] = key_of(candidate[i]);
    }
    for (std::size_t j = 0; j < reference.size(); ++j) {
      if (!ref_used[j]) ref_keys[j] = key_of(reference[j]);
    }
    for (const auto& m : run_stage(cand_keys, ref_keys, matches)) {
      cand_used[m.first] = true;
      ref_used[m.second] = true;
      matches.push_back(m);
    }
  };
  stage([](const std::string& token) { return token; });
  stage([](const std::string& token) { return porter_stem(token); });

  std::sort(matches.begin(), matches.end());
  MeteorAlignment out;
  out.matches = std::move(matches);
  for (std::size_t k = 0; k < out.matches.size(); ++k) {
    const bool continues = k > 0 && out.matches[k].first == out.matches[k - 1].first + 1 &&
                           out.matches[k].second == out.matches[k - 1].second + 1;
    if (!continues) ++out.chunks;
  }
  return out;
}

double meteor_from_counts(std::size_t matches, std::size_t candidate_length,
                          std::size_t reference_length, std::size_t chunks) {
  if (matches == 0 || candidate_length == 0 || reference_length == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(candidate_length);
  const double recall = m / static_cast<double>(reference_length);
  const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double fragmentation = static_cast<double>(chunks) / m;
  const double penalty = 0.5 * fragmentation * fragmentation * fragmentation;
  return f_mean * (1.0 - penalty);
}

double meteor_lite(const TokenSeq& candidate, const TokenSeq& reference) {
  const MeteorAlignment alignment = meteor_align(candidate, reference);
  return meteor_from_counts(alignment.matches.size(), candidate.size(), reference.size(),
                            alignment.chunks);
}

// ---------------------------------------------------------------------------
// SQuAD

std::string squad_normalize(std::string_view text) {
  const std::string lowered = to_lower(nfc(text));
  std::string stripped;
  stripped.reserve(lowered.size());
  for_each_code_point(lowered, [&](UChar32 c, std::string_view bytes) {
    if (!is_squad_punct(c)) stripped.append(bytes);
  });
  std::vector<std::string> words;
  for (auto& word : split_whitespace(stripped)) {
    if (word != "a" && word != "an" && word != "the") words.push_back(std::move(word));
  }
  return join(words, " ");
}

bool contains_normalized(std::string_view text, std::string_view phrase) {
  const std::vector<std::string> needle = split_whitespace(squad_normalize(phrase));
  if (needle.empty()) return false;
  const std::vector<std::string> hay = split_whitespace(squad_normalize(text));
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

int squad_em(std::string_view prediction, std::span<const std::string> golds) {
  const std::string normalized = squad_normalize(prediction);
  for (const auto& gold : golds) {
    if (squad_normalize(gold) == normalized) return 1;
  }
  return 0;
}

double squad_f1(std::string_view prediction, std::span<const std::string> golds) {
  const std::vector<std::string> pred_tokens = split_whitespace(squad_normalize(prediction));
  double best = 0.0;
  for (const auto& gold : golds) {
    const std::vector<std::string> gold_tokens = split_whitespace(squad_normalize(gold));
    if (pred_tokens.empty() || gold_tokens.empty()) {
      best = std::max(best, pred_tokens == gold_tokens ? 1.0 : 0.0);
      continue;
    }
    std::unordered_map<std::string, std::size_t> remaining;
    for (const auto& t : gold_tokens) ++remaining[t];
    std::size_t overlap = 0;
    for (const auto& t : pred_tokens) {
      auto it = remaining.find(t);
      if (it != remaining.end() && it->second > 0) {
        --it->second;
        ++overlap;
      }
    }
    const double f1 = 2.0 * static_cast<double>(overlap) /
                      static_cast<double>(pred_tokens.size() + gold_tokens.size());
    best = std::max(best, f1);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Perplexity

double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty()) {
    throw Error(ErrorKind::kArgument, "perplexity of an empty token sequence is undefined");
  }
  double sum = 0.0;
  for (double lp : logprobs) sum += lp;
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

double perplexity(const TokenLogprobs& lp) { return perplexity(std::span<const double>(lp.logprobs)); }

// ---------------------------------------------------------------------------
// Corpus scoring

namespace {

std::string id_diff_message(const std::set<std::string>& only_left, const char* left,
                            const std::set<std::string>& only_right, const char* right) {
  auto list = [](const std::set<std::string>& ids) {
    std::string out;
    std::size_t shown = 0;
    for (const auto& id : ids) {
      if (shown == 10) {
        out += ", ... (" + std::to_string(ids.size()) + " total)";
        break;
      }
      if (shown++ > 0) out += ", ";
      out += id;
    }
    return out;
  };
  std::string message = "pair_id sets differ";
  if (!only_left.empty()) message += "; only in " + std::string(left) + ": " + list(only_left);
  if (!only_right.empty()) message += "; only in " + std::string(right) + ": " + list(only_right);
  return message;
}

}  // namespace

MetricReport score_corpus(std::span<const Prediction> predictions,
                          std::span<const GoldQuestion> golds,
                          const std::map<std::string, double>* external) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.pair_id, &p).second) {
      throw Error(ErrorKind::kValidation, "duplicate prediction for pair_id " + p.pair_id);
    }
  }
  std::set<std::string> gold_ids;
  for (const auto& g : golds) {
    if (!gold_ids.insert(g.pair_id).second) {
      throw Error(ErrorKind::kValidation, "duplicate gold for pair_id " + g.pair_id);
    }
  }
  std::set<std::string> only_pred;
  std::set<std::string> only_gold;
  for (const auto& [id, p] : by_id) {
    if (!gold_ids.count(id)) only_pred.insert(id);
  }
  for (const auto& id : gold_ids) {
    if (!by_id.count(id)) only_gold.insert(id);
  }
  if (!only_pred.empty() || !only_gold.empty()) {
    throw Error(ErrorKind::kMismatch,
                id_diff_message(only_pred, "predictions", only_gold, "golds"));
  }

  MetricReport report;
  report.n = golds.size();
  BleuStats pooled;
  double external_sum = 0.0;
  for (const auto& gold : golds) {
    const Prediction& pred = *by_id.at(gold.pair_id);
    const TokenSeq cand = tokenize(pred.text);
    const TokenSeq ref = tokenize(gold.question);
    const BleuStats stats = bleu_stats(cand, std::span<const TokenSeq>(&ref, 1));
    pooled += stats;

    ExampleScores row;
    row.pair_id = gold.pair_id;
    row.bleu4 = bleu_from_stats(stats);
    row.rouge_l_f = rouge_l(cand, ref).f;
    row.meteor = meteor_lite(cand, ref);
    const std::string gold_text[] = {gold.question};
    row.em = squad_em(pred.text, gold_text);
    row.f1 = squad_f1(pred.text, gold_text);
    if (external) {
      auto it = external->find(gold.pair_id);
      if (it == external->end()) {
        throw Error(ErrorKind::kMismatch, "external scores missing pair_id " + gold.pair_id);
      }
      row.external = it->second;
      external_sum += it->second;
    }
    report.corpus.meteor += row.meteor;
    report.corpus.rouge_l += row.rouge_l_f;
    report.corpus.em_rate += row.em;
    report.corpus.mean_f1 += row.f1;
    report.per_example.push_back(std::move(row));
  }
  if (report.n > 0) {
    const auto n = static_cast<double>(report.n);
    report.corpus.bleu4 = bleu_from_stats(pooled);
    report.corpus.meteor /= n;
    report.corpus.rouge_l /= n;
    report.corpus.em_rate /= n;
    report.corpus.mean_f1 /= n;
    if (external) report.corpus.external = external_sum / n;
  }
  return report;
}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse,
                  path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    fn(record, line_no);
  }
}

std::string string_field(const json& record, std::initializer_list<const char*> keys,
                         const std::filesystem::path& path, std::size_t line_no) {
  for (const char* key : keys) {
    auto it = record.find(key);
    if (it != record.end() && it->is_string()) return it->get<std::string>();
  }
  throw Error(ErrorKind::kParse, path.string() + ": line " + std::to_string(line_no) +
                                     ": missing field " + *keys.begin());
}

}  // namespace

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  for_each_json_line(path, [&](const json& record, std::size_t line_no) {
    out.push_back({string_field(record, {"pair_id"}, path, line_no),
                   string_field(record, {"text"}, path, line_no)});
  });
  return out;
}

std::vector<GoldQuestion> read_gold_questions(const std::filesystem::path& path) {
  std::vector<GoldQuestion> out;
  for_each_json_line(path, [&](const json& record, std::size_t line_no) {
    out.push_back({string_field(record, {"pair_id", "id"}, path, line_no),
                   string_field(record, {"question"}, path, line_no)});
  });
  return out;
}

std::map<std::string, double> read_external_scores(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kParse, path.string() + ": expected an object {pair_id: score}");
  }
  std::map<std::string, double> out;
  for (const auto& [id, value] : doc.items()) {
    if (!value.is_number()) {
      throw Error(ErrorKind::kParse, path.string() + ": score for " + id + " is not a number");
    }
    out[id] = value.get<double>();
  }
  return out;
}

std::string report_to_json(const MetricReport& report) {
  json rows = json::array();
  for (const auto& row : report.per_example) {
    json r = {{"pair_id", row.pair_id}, {"bleu4", row.bleu4},   {"rouge_l_f", row.rouge_l_f},
              {"meteor", row.meteor},   {"em", row.em},         {"f1", row.f1}};
    if (row.external) r["external"] = *row.external;
    rows.push_back(std::move(r));
  }
  json corpus = {{"bleu4", report.corpus.bleu4},     {"meteor", report.corpus.meteor},
                 {"rouge_l", report.corpus.rouge_l}, {"em_rate", report.corpus.em_rate},
                 {"mean_f1", report.corpus.mean_f1}};
  if (report.corpus.external) corpus["external"] = *report.corpus.external;
  json doc = {{"n", report.n}, {"corpus", corpus}, {"per_example", rows}};
  return doc.dump(2);
}

MetricReport report_from_json(std::string_view json_text) {
  MetricReport report;
  try {
    const json doc = json::parse(json_text);
    report.n = doc.at("n").get<std::size_t>();
    const json& c = doc.at("corpus");
    report.corpus.bleu4 = c.at("bleu4").get<double>();
    report.corpus.meteor = c.at("meteor").get<double>();
    report.corpus.rouge_l = c.at("rouge_l").get<double>();
    report.corpus.em_rate = c.at("em_rate").get<double>();
    report.corpus.mean_f1 = c.at("mean_f1").get<double>();
    if (c.contains("external")) report.corpus.external = c.at("external").get<double>();
    for (const json& r : doc.at("per_example")) {
      ExampleScores row;
      row.pair_id = r.at("pair_id").get<std::string>();
      row.bleu4 = r.at("bleu4").get<double>();
      row.rouge_l_f = r.at("rouge_l_f").get<double>();
      row.meteor = r.at("meteor").get<double>();
      row.em = r.at("em").get<int>();
      row.f1 = r.at("f1").get<double>();
      if (r.contains("external")) row.external = r.at("external").get<double>();
      report.per_example.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("metric report: ") + e.what());
  }
  return report;
}

void write_report_json(const MetricReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, report_to_json(report) + "\n");
}

MetricReport read_report_json(const std::filesystem::path& path) {
  return report_from_json(read_file(path));
}

namespace {

std::string full_precision(double value) {
  return json(value).dump();
}

}  // namespace

void write_report_csv(const MetricReport& report, const std::filesystem::path& path) {
  const bool has_external = report.corpus.external.has_value();
  std::vector<std::string> header = {"pair_id", "bleu4", "rouge_l_f", "meteor", "em", "f1"};
  if (has_external) header.push_back("external");
  std::string out = csv_row(header);
  for (const auto& row : report.per_example) {
    std::vector<std::string> fields = {row.pair_id,
                                       full_precision(row.bleu4),
                                       full_precision(row.rouge_l_f),
                                       full_precision(row.meteor),
                                       std::to_string(row.em),
                                       full_precision(row.f1)};
    if (has_external) fields.push_back(full_precision(row.external.value_or(0.0)));
    out += csv_row(fields);
  }
  std::vector<std::string> summary = {"__corpus__",
                                      full_precision(report.corpus.bleu4),
                                      full_precision(report.corpus.rouge_l),
                                      full_precision(report.corpus.meteor),
                                      full_precision(report.corpus.em_rate),
                                      full_precision(report.corpus.mean_f1)};
  if (has_external) summary.push_back(full_precision(*report.corpus.external));
  out += csv_row(summary);
  write_file_atomic(path, out);
}

}  // namespace qgsynth
