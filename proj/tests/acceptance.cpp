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

// Acceptance checks for the toolkit. Prints one PASS/FAIL line per criterion
// and exits non-zero when any fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "qgsynth/cli.hpp"
#include "qgsynth/endpoints.hpp"
#include "qgsynth/manifest.hpp"
#include "qgsynth/metrics.hpp"
#include "qgsynth/mixer.hpp"
#include "qgsynth/quality.hpp"
#include "qgsynth/synthesis.hpp"
#include "qgsynth/text.hpp"
#include "support.hpp"

using namespace qgsynth;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kOracleTolerance = 1e-12;
constexpr double kOracleBudgetSeconds = 10.0;
constexpr int kOracleCases = 200;
constexpr std::size_t kOracleMaxLen = 12;
constexpr double kMeteorIdentityFloor = 0.99;
constexpr std::size_t kMeteorMinTokens = 8;
constexpr double kPipelineBudgetSeconds = 5.0;
constexpr std::size_t kResumePairs = 100;
constexpr std::size_t kKillAfterCalls = 37;
constexpr std::size_t kMixPairs = 10000;
constexpr double kPerplexityTolerance = 1e-9;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TokenSeq seq(const testing::Words& words) { return tokenize(join(words, " ")); }

Outcome metric_oracles() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst_bleu = 0.0;
  double worst_rouge = 0.0;
  for (int i = 0; i < kOracleCases; ++i) {
    const auto cand = testing::random_words(rng, kOracleMaxLen, 4 + i % 7);
    std::vector<testing::Words> refs(1 + i % 3);
    std::vector<TokenSeq> ref_seqs;
    for (auto& r : refs) {
      r = testing::random_words(rng, kOracleMaxLen, 4 + i % 7);
      ref_seqs.push_back(seq(r));
    }
    const double bleu = bleu4(seq(cand), ref_seqs);
    const double bleu_oracle = testing::oracle_bleu(testing::oracle_bleu_counts(cand, refs));
    worst_bleu = std::max(worst_bleu, std::fabs(bleu - bleu_oracle));

    double rouge_oracle = 0.0;
    const auto lcs = static_cast<double>(testing::oracle_lcs(cand, refs[0]));
    if (lcs > 0) {
      const double p = lcs / static_cast<double>(cand.size());
      const double r = lcs / static_cast<double>(refs[0].size());
      rouge_oracle = 2 * p * r / (p + r);
    }
    worst_rouge = std::max(worst_rouge, std::fabs(rouge_l(seq(cand), ref_seqs[0]).f - rouge_oracle));
  }
  const double elapsed = seconds_since(start);
  return {worst_bleu <= kOracleTolerance && worst_rouge <= kOracleTolerance &&
              elapsed < kOracleBudgetSeconds,
          std::to_string(kOracleCases) + " cases, max |bleu4 - oracle| = " +
              fmt("%.3g", worst_bleu) + ", max |rouge_l - oracle| = " + fmt("%.3g", worst_rouge) +
              ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome identity() {
  std::vector<Prediction> preds;
  std::vector<GoldQuestion> golds;
  std::ifstream in(testing::data_path("questions_50.txt"));
  std::size_t i = 0;
  for (std::string line; std::getline(in, line);) {
    if (trim(line).empty()) continue;
    const std::string id = "q" + std::to_string(i++);
    preds.push_back({id, line});
    golds.push_back({id, line});
  }
  const MetricReport r = score_corpus(preds, golds);
  bool pass = r.n == 50;
  std::size_t long_ones = 0;
  double min_meteor = 1.0;
  for (std::size_t k = 0; k < r.per_example.size(); ++k) {
    const auto& ex = r.per_example[k];
    pass = pass && ex.bleu4 == 1.0 && ex.rouge_l_f == 1.0;
    if (tokenize(golds[k].question).size() >= kMeteorMinTokens) {
      ++long_ones;
      min_meteor = std::min(min_meteor, ex.meteor);
    }
  }
  pass = pass && min_meteor >= kMeteorIdentityFloor;
  return {pass, std::to_string(r.n) + " questions, bleu4 = rouge_l = 1 exactly: " +
                    (pass ? "yes" : "no") + ", min meteor over " + std::to_string(long_ones) +
                    " questions of >= 8 tokens = " + fmt("%.6f", min_meteor)};
}

Outcome squad_normalization() {
  struct Case {
    std::string prediction;
    std::vector<std::string> golds;
    int em;
    double f1;
  };
  const std::vector<Case> cases = {
      {"the photoelectric effect", {"photoelectric effect"}, 1, 1.0},
      {"Photoelectric Effect.", {"photoelectric effect"}, 1, 1.0},
      {"an apple", {"apple"}, 1, 1.0},
      {"A  dog", {"dog"}, 1, 1.0},
      {"the cat sat", {"cat"}, 0, 2.0 / 3.0},
      {"four haploid cells", {"four haploid"}, 0, 4.0 / 5.0},
      {"Denver Broncos", {"broncos"}, 0, 2.0 / 3.0},
      {"", {"x"}, 0, 0.0},
      {"the", {"a"}, 1, 1.0},
      {"1,000", {"1000"}, 1, 1.0},
      {"U.S.", {"US"}, 1, 1.0},
      {"rock-and-roll", {"rock and roll"}, 0, 0.0},
      {"blue blue red", {"blue red red"}, 0, 2.0 / 3.0},
      {"Paris", {"London", "paris, France"}, 0, 2.0 / 3.0},
      {"Paris", {"paris", "x"}, 1, 1.0},
      {"The Theory of Relativity", {"theory relativity"}, 0, 4.0 / 5.0},
      {"anthem", {"the anthem"}, 1, 1.0},
      {"Theater", {"ater"}, 0, 0.0},
      {"  multiple   spaces  ", {"multiple spaces"}, 1, 1.0},
      {"x y z", {"z y x"}, 0, 1.0},
  };
  std::size_t passed = 0;
  std::string first_failure;
  for (const auto& c : cases) {
    const int em = squad_em(c.prediction, c.golds);
    const double f1 = squad_f1(c.prediction, c.golds);
    if (em == c.em && f1 == c.f1) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = "; first failure '" + c.prediction + "': em " + std::to_string(em) +
                      " f1 " + fmt("%.17g", f1);
    }
  }
  return {passed == cases.size(), std::to_string(passed) + "/" + std::to_string(cases.size()) +
                                      " cases exact" + first_failure};
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), {"--log-level", "error"});
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Outcome offline_pipeline() {
  testing::TempDir dir;
  auto p = [&](const char* name) { return (dir / name).string(); };
  const std::size_t http_before = http_requests_issued();
  const auto start = Clock::now();
  std::vector<std::string> failures;
  auto step = [&](const std::string& name, std::vector<std::string> args) {
    const auto r = cli_run(std::move(args));
    if (r.code != 0) failures.push_back(name + " exited " + std::to_string(r.code) + " " + r.err);
  };

  step("ingest", {"ingest", "--in", testing::data_path("squad_v1_sample.json").string(), "--out",
                  p("corpus.jsonl")});
  step("synthesize", {"synthesize", "--corpus", p("corpus.jsonl"), "--out", p("synth.jsonl"),
                      "--endpoint", "mock:"});
  step("real", {"synthesize", "--corpus", p("corpus.jsonl"), "--mode", "real", "--out",
                p("real.jsonl")});
  std::vector<std::string> artifacts = {"corpus.jsonl", "synth.jsonl", "real.jsonl"};
  for (const char* f : {"0", "0.5", "1"}) {
    const std::string mixed = std::string("mix_") + f + ".jsonl";
    step(std::string("mix ") + f, {"mix", "--real", p("real.jsonl"), "--synthetic",
                                   p("synth.jsonl"), "--fraction", f, "--out", p(mixed.c_str())});
    artifacts.push_back(mixed);
  }
  step("emit", {"emit", "--triplets", p("mix_0.5.jsonl"), "--out", p("train.jsonl")});
  artifacts.push_back("train.jsonl");

  // Stand-in for fine-tuned model output: the gold question minus its last word.
  std::string preds;
  if (failures.empty()) {
    for (const auto& t : read_triplets(dir / "real.jsonl")) {
      auto words = split_whitespace(t.question);
      if (words.size() > 1) words.pop_back();
      preds += nlohmann::json{{"pair_id", t.pair_id}, {"text", join(words, " ")}}.dump() + "\n";
    }
  }
  testing::spit(dir / "predictions.jsonl", preds);
  step("score", {"score", "--pred", p("predictions.jsonl"), "--gold", p("real.jsonl"), "--out",
                 p("scores.json")});
  artifacts.push_back("scores.json");
  const double elapsed = seconds_since(start);

  std::size_t verified = 0;
  for (const auto& a : artifacts) {
    const auto r = cli_run({"report", "verify", "--manifest", p(a.c_str())});
    if (r.code == 0) {
      ++verified;
    } else {
      failures.push_back("verify " + a + ": " + r.out + r.err);
    }
  }
  const std::size_t http = http_requests_issued() - http_before;
  const bool pass = failures.empty() && http == 0 && elapsed < kPipelineBudgetSeconds;
  return {pass, fmt("%.2f", elapsed) + " s, " + std::to_string(http) + " network requests, " +
                    std::to_string(verified) + "/" + std::to_string(artifacts.size()) +
                    " manifests verified" + (failures.empty() ? "" : "; " + failures.front())};
}

Corpus resume_corpus() {
  std::vector<QAPair> pairs;
  for (std::size_t i = 0; i < kResumePairs; ++i) {
    const std::string id = "pair" + std::to_string(1000 + i);
    pairs.push_back({id, "What is item " + id + "?", {"item " + id}, std::nullopt, std::nullopt,
                     Source::kGeneric});
  }
  return Corpus(std::move(pairs));
}

std::size_t complete_lines(const std::filesystem::path& path) {
  const std::string raw = testing::slurp(path);
  return static_cast<std::size_t>(std::count(raw.begin(), raw.end(), '\n'));
}

Outcome resumability() {
  testing::TempDir dir;
  const auto out = dir / "synth.jsonl";
  const Corpus corpus = resume_corpus();
  const PromptPreset preset = builtin_preset("squad_wiki");
  SynthesisOptions options;
  options.output_path = out;
  options.parallelism = 4;

  // The child is killed outright partway through, as an operator's kill -9 would.
  std::cout.flush();
  const pid_t child = fork();
  if (child == 0) {
    auto mock = std::make_shared<MockEndpoint>();
    MockEndpoint plain;
    std::atomic<std::size_t> calls{0};
    mock->set_responder([&](const CompletionRequest& r) {
      if (++calls > kKillAfterCalls) raise(SIGKILL);
      return plain.complete(r);
    });
    Gateway gw(mock);
    synthesize(corpus, preset, gw, options);
    _exit(0);
  }
  int status = 0;
  waitpid(child, &status, 0);
  const bool killed = WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL;

  // A torn record left by a write cut short.
  { std::ofstream(out, std::ios::app) << R"({"pair_id":"pair1099","question":"Wha)"; }
  const std::size_t completed = complete_lines(out);

  auto mock = std::make_shared<MockEndpoint>();
  Gateway gw(mock);
  synthesize(corpus, preset, gw, options);
  const std::size_t new_calls = mock->calls();

  testing::TempDir ref_dir;
  SynthesisOptions ref_options = options;
  ref_options.output_path = ref_dir / "synth.jsonl";
  auto ref_mock = std::make_shared<MockEndpoint>();
  Gateway ref_gw(ref_mock);
  synthesize(corpus, preset, ref_gw, ref_options);
  const bool same_hash = canonical_file_hash(out) == canonical_file_hash(ref_options.output_path);

  const bool pass = killed && completed < kResumePairs && new_calls == kResumePairs - completed &&
                    same_hash;
  return {pass, std::string("killed: ") + (killed ? "yes" : "no") + ", completed before kill " +
                    std::to_string(completed) + ", new calls " + std::to_string(new_calls) +
                    " (expected " + std::to_string(kResumePairs - completed) +
                    "), output hash matches uninterrupted run: " + (same_hash ? "yes" : "no")};
}

Outcome mix_correctness() {
  std::vector<Triplet> real;
  std::vector<Triplet> synth;
  for (std::size_t i = 0; i < kMixPairs; ++i) {
    const std::string id = "m" + std::to_string(100000 + i);
    real.push_back(testing::make_triplet(id, "Q?", "A", "real"));
    synth.push_back(testing::make_triplet(id, "Q?", "A", "synthetic", ContextKind::kSyntheticZero));
  }
  bool counts_ok = true;
  bool nested = true;
  std::set<std::string> previous;
  std::string counts;
  for (int k = 0; k <= 10; ++k) {
    std::set<std::string> flipped;
    for (const auto& t : mix(real, synth, k / 10.0, 2024)) {
      if (is_synthetic(t.context_kind)) flipped.insert(t.pair_id);
    }
    counts_ok = counts_ok && flipped.size() == static_cast<std::size_t>(k) * 1000;
    nested = nested && std::includes(flipped.begin(), flipped.end(), previous.begin(),
                                     previous.end());
    counts += (k ? "," : "") + std::to_string(flipped.size());
    previous = std::move(flipped);
  }
  return {counts_ok && nested, "synthetic counts {" + counts + "}, prefix-monotone: " +
                                   (nested ? "yes" : "no")};
}

Outcome quality_suite() {
  const auto table6 = read_triplets(testing::data_path("osbio_table6.jsonl"));
  const ContainmentResult containment = containment_rate(table6);

  std::vector<Triplet> probe;
  auto mock = std::make_shared<MockEndpoint>();
  for (const auto& t : table6) {
    probe.push_back(t);
    probe.back().context = t.context + " The answer is " + t.answer + ".";
    mock->set_qa_answer(t.question, t.answer);
  }
  Gateway gw(mock);
  const QAProbeReport qa = qa_probe(probe, gw);

  auto uniform = std::make_shared<MockEndpoint>();
  uniform->set_uniform_logprob(-std::log(2.0));
  Gateway scorer(uniform);
  const PerplexityReport ppl = perplexity_stats(table6, scorer, "gpt2");
  double worst = 0.0;
  for (const auto& s : ppl.series)
    for (const auto& [id, v] : s.values) worst = std::max(worst, std::fabs(v - 2.0));

  const bool containment_ok = containment.rate == 1.0;
  const bool qa_ok = qa.n == table6.size() && qa.em_rate == 1.0 && qa.mean_f1 == 1.0;
  const bool ppl_ok = ppl.errors.empty() && worst <= kPerplexityTolerance;
  std::string detail = "containment_rate " + std::to_string(containment.hits) + "/" +
                       std::to_string(containment.n) + " = " + fmt("%.4f", containment.rate);
  if (!containment.misses.empty()) detail += " (missed: " + join(containment.misses, ", ") + ")";
  detail += ", qa_probe em_rate " + fmt("%.3f", qa.em_rate) + " mean_f1 " +
            fmt("%.3f", qa.mean_f1) + ", perplexity max |ppl - 2| = " + fmt("%.3g", worst);
  return {containment_ok && qa_ok && ppl_ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric_oracles", metric_oracles},
      {"identity", identity},
      {"squad_normalization", squad_normalization},
      {"offline_pipeline", offline_pipeline},
      {"resumability", resumability},
      {"mix_correctness", mix_correctness},
      {"quality_suite", quality_suite},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
