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

#include <doctest.h>

#include <cstdio>

#include "qgsynth/csv.hpp"
#include "qgsynth/error.hpp"
#include "qgsynth/manifest.hpp"
#include "qgsynth/report.hpp"
#include "support.hpp"

using namespace qgsynth;
using qgsynth::testing::TempDir;

namespace {

MetricReport report_with(double bleu, double meteor, double rouge, double em, double f1,
                         std::size_t n = 10) {
  MetricReport r;
  r.n = n;
  r.corpus = {bleu, meteor, rouge, em, f1, std::nullopt};
  return r;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("comparison table keeps rows in input order") {
  const std::vector<LabeledReport> reports = {
      {"real", report_with(0.12345, 0.2, 0.3, 0.1, 0.25)},
      {"synthetic_zero", report_with(0.11, 0.19, 0.29, 0.09, 0.24)},
      {"synthetic_few", report_with(0.1, 0.18, 0.28, 0.08, 0.23)}};
  const auto rows = parse_csv(render_table(reports, false));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"label", "n", "bleu4", "meteor", "rouge_l", "em", "f1"});
  CHECK(rows[1][0] == "real");
  CHECK(rows[2][0] == "synthetic_zero");
  CHECK(rows[3][0] == "synthetic_few");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& c = reports[i].second.corpus;
    const std::vector<double> expect{c.bleu4, c.meteor, c.rouge_l, c.em_rate, c.mean_f1};
    for (std::size_t m = 0; m < expect.size(); ++m) CHECK(rows[i + 1][m + 2] == fixed3(expect[m]));
  }
}

TEST_CASE("single row and external column") {
  MetricReport r = report_with(1, 1, 1, 1, 1, 3);
  r.corpus.external = 0.875;
  const auto rows = parse_csv(render_table({{"only", r}}, false));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].back() == "external");
  CHECK(rows[1].back() == "0.875");
  CHECK(rows[1][1] == "3");
  CHECK_THROWS_AS(render_table({}, false), Error);
}

TEST_CASE("markdown table") {
  TempDir dir;
  table_compare({{"a|b", report_with(0.5, 0.5, 0.5, 0.5, 0.5)}}, dir / "t.md");
  const std::string md = testing::slurp(dir / "t.md");
  CHECK(md.rfind("| label | n | bleu4", 0) == 0);
  CHECK(md.find("| a\\|b | 10 | 0.500") != std::string::npos);
  CHECK(md.find("---") != std::string::npos);
}

TEST_CASE("curve data covers every fraction and metric") {
  TempDir dir;
  std::vector<CurvePoint> points;
  for (int k = 10; k >= 0; --k) {
    points.push_back({k / 10.0, report_with(k / 100.0, k / 50.0, 0, 0, 0)});
  }
  curve_data(points, dir / "c.csv", {"bleu4", "meteor"});
  const auto rows = read_curve_data(dir / "c.csv");
  REQUIRE(rows.size() == 22);
  for (std::size_t i = 1; i < 11; ++i) {
    CHECK(rows[i].metric == "bleu4");
    CHECK(rows[i].fraction > rows[i - 1].fraction);
  }
  CHECK(rows[11].metric == "meteor");
  CHECK(rows == curve_rows(points, {"bleu4", "meteor"}));
  CHECK(rows[3].value == 0.03);

  points.push_back({0.5, report_with(0, 0, 0, 0, 0)});
  CHECK_THROWS_AS(curve_rows(points, {"bleu4"}), Error);
  CHECK_THROWS_AS(curve_rows({{0.1, {}}}, {"nope"}), Error);
}

TEST_CASE("manifest round trip and verification") {
  TempDir dir;
  testing::spit(dir / "corpus.jsonl", "{\"id\":\"a\"}\n");
  testing::spit(dir / "out.jsonl", "{}\n");
  RunParameters p;
  p.command = "synthesize";
  p.seeds["mix"] = 42;
  p.inputs["corpus"] = dir / "corpus.jsonl";
  p.outputs["triplets"] = dir / "out.jsonl";
  p.mode = "zero_shot";
  p.gateway = GatewayFingerprint{"mock:", "gpt-3.5-turbo", "", 0.9, 1.0, 512};
  const ExperimentManifest m = manifest_for(p);
  CHECK(m.run_id.size() == 16);
  CHECK(manifest_to_json(m) == manifest_to_json(manifest_for(p)));
  CHECK(manifest_from_json(manifest_to_json(m)) == m);
  CHECK(manifest_to_json(m).find("OPENAI") == std::string::npos);

  write_manifest(m, manifest_path_for(dir / "out.jsonl"));
  CHECK(std::filesystem::exists(dir / "out.jsonl.manifest.json"));
  const auto loaded = read_manifest(dir / "out.jsonl.manifest.json");
  CHECK(verify_manifest(loaded, manifest_for(p)).ok());
  CHECK(verify_manifest_files(loaded).ok());

  // Credentials never enter the manifest, so changing them changes nothing.
  setenv("OPENAI_API_KEY", "rotated", 1);
  CHECK(verify_manifest(loaded, manifest_for(p)).ok());
  unsetenv("OPENAI_API_KEY");

  testing::spit(dir / "corpus.jsonl", "{\"id\":\"b\"}\n");
  const auto drift = verify_manifest(loaded, manifest_for(p));
  REQUIRE(drift.diffs.size() == 1);
  CHECK(drift.diffs[0].field == "/inputs/corpus/sha256");
  CHECK_FALSE(verify_manifest_files(loaded).ok());

  RunParameters q = p;
  q.gateway->temperature = 0.7;
  testing::spit(dir / "corpus.jsonl", "{\"id\":\"a\"}\n");
  const auto param_drift = verify_manifest(loaded, manifest_for(q));
  REQUIRE(param_drift.diffs.size() == 1);
  CHECK(param_drift.diffs[0].field == "/gateway/temperature");

  CHECK(manifest_path_for(dir.path()) == dir / "manifest.json");
  CHECK_THROWS_AS(manifest_from_json(R"({"schema_version":99})"), Error);
}

}  // TEST_SUITE
