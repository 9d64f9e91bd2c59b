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
#include <string>
#include <utility>
#include <vector>

#include "qgsynth/manifest.hpp"
#include "qgsynth/metrics.hpp"

namespace qgsynth {

// Corpus-level value by name: bleu4, meteor, rouge_l, em, f1, external.
double corpus_metric(const CorpusScores& scores, std::string_view metric);

using LabeledReport = std::pair<std::string, MetricReport>;

// One row per label in input order, values at 3 decimals. Markdown when the
// path ends in ".md", CSV otherwise.
std::string render_table(const std::vector<LabeledReport>& reports, bool markdown);
void table_compare(const std::vector<LabeledReport>& reports, const std::filesystem::path& path);

struct CurvePoint {
  double fraction = 0.0;
  MetricReport report;
};

struct CurveRow {
  double fraction = 0.0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

// Long format (fraction, metric, value), grouped by metric in the order
// given, fractions ascending within each group, full precision.
std::vector<CurveRow> curve_rows(const std::vector<CurvePoint>& points,
                                 const std::vector<std::string>& metrics);
std::string render_curve(const std::vector<CurveRow>& rows);
void curve_data(const std::vector<CurvePoint>& points, const std::filesystem::path& path,
                const std::vector<std::string>& metrics = {"bleu4", "meteor", "rouge_l"});
std::vector<CurveRow> read_curve_data(const std::filesystem::path& path);

}  // namespace qgsynth
