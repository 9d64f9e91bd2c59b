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

#include "qgsynth/quality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "qgsynth/csv.hpp"
#include "qgsynth/metrics.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {
namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, n));
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

nlohmann::json histogram_json(const Histogram& h) {
  return {{"label", h.label}, {"bin_edges", h.bin_edges}, {"counts", h.counts},
          {"n", h.n},         {"mean", h.mean},           {"median", h.median}};
}

}  // namespace

Histogram make_histogram(std::vector<double> values, std::size_t bins, std::string label) {
  if (values.empty()) throw Error(ErrorKind::kArgument, "histogram: no values");
  if (bins == 0) throw Error(ErrorKind::kArgument, "histogram: bin count must be positive");
  std::sort(values.begin(), values.end());
  Histogram h;
  h.label = std::move(label);
  h.n = values.size();
  h.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(h.n);
  const std::size_t mid = h.n / 2;
  h.median = h.n % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;

  const double lo = values.front();
  double hi = values.back();
  if (hi == lo) {
    bins = 1;
    hi = lo + 1.0;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.bin_edges[b] = lo + width * static_cast<double>(b);
  h.bin_edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

Histogram length_stats(const std::vector<Triplet>& triplets, std::size_t bins) {
  if (triplets.empty()) throw Error(ErrorKind::kArgument, "length_stats: no triplets");
  std::vector<double> lengths;
  lengths.reserve(triplets.size());
  for (const auto& t : triplets) lengths.push_back(static_cast<double>(word_count(t.context)));
  return make_histogram(std::move(lengths), bins, "word_count");
}

PerplexityReport perplexity_stats(const std::vector<Triplet>& triplets, Gateway& gateway,
                                  std::string_view scorer_model, std::size_t bins,
                                  std::size_t parallelism) {
  std::vector<std::optional<double>> ppl(triplets.size());
  PerplexityReport report;
  std::mutex mu;
  parallel_for(triplets.size(), parallelism, [&](std::size_t i) {
    const auto& t = triplets[i];
    try {
      ppl[i] = perplexity(gateway.token_logprobs(t.context, scorer_model));
    } catch (const Error& e) {
      std::lock_guard lock(mu);
      report.errors.push_back({t.pair_id, e.kind(), e.what()});
    }
  });
  std::sort(report.errors.begin(), report.errors.end(),
            [](const ContextFailure& a, const ContextFailure& b) { return a.pair_id < b.pair_id; });

  for (auto kind : {ContextKind::kReal, ContextKind::kSyntheticZero, ContextKind::kSyntheticFew}) {
    PerplexitySeries series;
    series.kind = kind;
    std::vector<double> values;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      if (triplets[i].context_kind != kind || !ppl[i]) continue;
      series.values.emplace_back(triplets[i].pair_id, *ppl[i]);
      values.push_back(*ppl[i]);
    }
    if (values.empty()) continue;
    series.histogram = make_histogram(std::move(values), bins, std::string(to_string(kind)));
    report.series.push_back(std::move(series));
  }
  return report;
}

ContainmentResult containment_rate(const std::vector<Triplet>& triplets, ContainmentMode mode) {
  if (triplets.empty()) throw Error(ErrorKind::kArgument, "containment_rate: no triplets");
  ContainmentResult r;
  r.n = triplets.size();
  for (const auto& t : triplets) {
    if (contains_answer(t.context, t.answer, mode)) {
      ++r.hits;
    } else {
      r.misses.push_back(t.pair_id);
    }
  }
  r.rate = static_cast<double>(r.hits) / static_cast<double>(r.n);
  return r;
}

QAProbeReport qa_probe(const std::vector<Triplet>& triplets, Gateway& gateway,
                       std::size_t parallelism) {
  QAProbeReport report;
  report.per_example.resize(triplets.size());
  parallel_for(triplets.size(), parallelism, [&](std::size_t i) {
    const auto& t = triplets[i];
    auto& ex = report.per_example[i];
    ex.pair_id = t.pair_id;
    try {
      ex.predicted = gateway.answer_question(t.context, t.question).predicted_span;
      const std::vector<std::string> golds{t.answer};
      ex.em = squad_em(ex.predicted, golds);
      ex.f1 = squad_f1(ex.predicted, golds);
    } catch (const Error& e) {
      ex.skipped = ContextFailure{t.pair_id, e.kind(), e.what()};
    }
  });
  double em_sum = 0.0;
  double f1_sum = 0.0;
  for (const auto& ex : report.per_example) {
    if (ex.skipped) {
      ++report.skips;
      continue;
    }
    ++report.n;
    em_sum += ex.em;
    f1_sum += ex.f1;
  }
  if (report.n > 0) {
    report.em_rate = em_sum / static_cast<double>(report.n);
    report.mean_f1 = f1_sum / static_cast<double>(report.n);
  }
  return report;
}

std::size_t review_worksheet(const std::vector<ReviewCase>& cases,
                             const std::filesystem::path& path, std::size_t cap,
                             std::uint64_t seed) {
  std::vector<const ReviewCase*> chosen;
  if (cases.size() <= cap) {
    for (const auto& c : cases) chosen.push_back(&c);
  } else {
    std::vector<const ReviewCase*> sorted;
    for (const auto& c : cases) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const ReviewCase* a, const ReviewCase* b) { return a->pair_id < b->pair_id; });
    const auto perm = seeded_permutation(sorted.size(), seed);
    for (std::size_t i = 0; i < cap; ++i) chosen.push_back(sorted[perm[i]]);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const ReviewCase* a, const ReviewCase* b) { return a->pair_id < b->pair_id; });

  std::string body =
      csv_row({"pair_id", "question", "answers", "context", "probe_answer", "reviewer_notes"});
  for (const auto* c : chosen) {
    body += csv_row({c->pair_id, c->question, join(c->answers, " | "), c->context,
                     c->probe_answer, ""});
  }
  write_file_atomic(path, body);
  return chosen.size();
}

std::string histograms_to_json(const std::vector<Histogram>& histograms) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& h : histograms) series.push_back(histogram_json(h));
  return nlohmann::json{{"series", series}}.dump(2) + "\n";
}

void write_histograms(const std::vector<Histogram>& histograms, const std::filesystem::path& path) {
  write_file_atomic(path, histograms_to_json(histograms));
}

void write_quality_summary(const QualitySummary& s, const std::filesystem::path& path) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j = {{"containment_rate", opt(s.containment_rate)},
                      {"em_rate", opt(s.em_rate)},
                      {"mean_f1", opt(s.mean_f1)},
                      {"n", s.n},
                      {"skips", s.skips}};
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace qgsynth
