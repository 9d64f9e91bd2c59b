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

#include "qgsynth/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "qgsynth/csv.hpp"
#include "qgsynth/error.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {
namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, std::string(what) + ": not a number: '" + s + "'");
  }
}

}  // namespace

double corpus_metric(const CorpusScores& scores, std::string_view metric) {
  if (metric == "bleu4") return scores.bleu4;
  if (metric == "meteor") return scores.meteor;
  if (metric == "rouge_l") return scores.rouge_l;
  if (metric == "em") return scores.em_rate;
  if (metric == "f1") return scores.mean_f1;
  if (metric == "external") {
    if (!scores.external) throw Error(ErrorKind::kArgument, "report has no external scores");
    return *scores.external;
  }
  throw Error(ErrorKind::kArgument, "unknown metric '" + std::string(metric) + "'");
}

std::string render_table(const std::vector<LabeledReport>& reports, bool markdown) {
  if (reports.empty()) throw Error(ErrorKind::kArgument, "table: no reports");
  std::vector<std::string> metrics{"bleu4", "meteor", "rouge_l", "em", "f1"};
  const bool external = std::any_of(reports.begin(), reports.end(), [](const LabeledReport& r) {
    return r.second.corpus.external.has_value();
  });
  if (external) metrics.push_back("external");

  std::vector<std::string> header{"label", "n"};
  header.insert(header.end(), metrics.begin(), metrics.end());
  std::vector<std::vector<std::string>> rows;
  for (const auto& [label, report] : reports) {
    std::vector<std::string> row{label, std::to_string(report.n)};
    for (const auto& m : metrics) {
      row.push_back(m == "external" && !report.corpus.external
                        ? std::string()
                        : fixed3(corpus_metric(report.corpus, m)));
    }
    rows.push_back(std::move(row));
  }

  std::string out;
  if (!markdown) {
    out += csv_row(header);
    for (const auto& row : rows) out += csv_row(row);
    return out;
  }
  auto md_row = [](const std::vector<std::string>& cells) {
    std::string line = "|";
    for (const auto& c : cells) {
      std::string cell = c;
      std::string escaped;
      for (char ch : cell) {
        if (ch == '|') escaped += '\\';
        escaped += ch == '\n' ? ' ' : ch;
      }
      line += " " + escaped + " |";
    }
    return line + "\n";
  };
  out += md_row(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (const auto& row : rows) out += md_row(row);
  return out;
}

void table_compare(const std::vector<LabeledReport>& reports, const std::filesystem::path& path) {
  write_file_atomic(path, render_table(reports, path.extension() == ".md"));
}

std::vector<CurveRow> curve_rows(const std::vector<CurvePoint>& points,
                                 const std::vector<std::string>& metrics) {
  if (points.empty()) throw Error(ErrorKind::kArgument, "curve: no points");
  if (metrics.empty()) throw Error(ErrorKind::kArgument, "curve: no metrics");
  std::vector<const CurvePoint*> sorted;
  for (const auto& p : points) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const CurvePoint* a, const CurvePoint* b) { return a->fraction < b->fraction; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->fraction == sorted[i - 1]->fraction) {
      throw Error(ErrorKind::kArgument,
                  "curve: duplicate fraction " + full_precision(sorted[i]->fraction));
    }
  }
  std::vector<CurveRow> rows;
  for (const auto& m : metrics) {
    for (const auto* p : sorted) rows.push_back({p->fraction, m, corpus_metric(p->report.corpus, m)});
  }
  return rows;
}

std::string render_curve(const std::vector<CurveRow>& rows) {
  std::string out = csv_row({"fraction", "metric", "value"});
  for (const auto& r : rows) {
    out += csv_row({full_precision(r.fraction), r.metric, full_precision(r.value)});
  }
  return out;
}

void curve_data(const std::vector<CurvePoint>& points, const std::filesystem::path& path,
                const std::vector<std::string>& metrics) {
  write_file_atomic(path, render_curve(curve_rows(points, metrics)));
}

std::vector<CurveRow> read_curve_data(const std::filesystem::path& path) {
  const auto table = parse_csv(read_file(path));
  if (table.empty() || table.front() != std::vector<std::string>{"fraction", "metric", "value"}) {
    throw Error(ErrorKind::kParse, path.string() + ": expected header fraction,metric,value");
  }
  std::vector<CurveRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& r = table[i];
    if (r.size() != 3) {
      throw Error(ErrorKind::kParse,
                  path.string() + ": row " + std::to_string(i + 1) + ": expected 3 fields");
    }
    rows.push_back({parse_double(r[0], "fraction"), r[1], parse_double(r[2], "value")});
  }
  return rows;
}

}  // namespace qgsynth
