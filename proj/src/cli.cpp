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

#include "qgsynth/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qgsynth/corpus.hpp"
#include "qgsynth/csv.hpp"
#include "qgsynth/endpoints.hpp"
#include "qgsynth/manifest.hpp"
#include "qgsynth/metrics.hpp"
#include "qgsynth/mixer.hpp"
#include "qgsynth/quality.hpp"
#include "qgsynth/report.hpp"
#include "qgsynth/synthesis.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth::cli {
namespace {

namespace fs = std::filesystem;

struct GatewayFlags {
  std::string endpoint = "mock:";
  std::string qa_endpoint;
  std::string api_key_env = "OPENAI_API_KEY";
  int context_window = 1024;
  int timeout = 60;
  std::string cache_dir;
  bool no_cache = false;
  double rpm = 0.0;
  double burst = 1.0;
  int max_retries = 3;
};

void add_gateway_flags(CLI::App* sub, GatewayFlags& g) {
  sub->add_option("--endpoint", g.endpoint, "Endpoint base URL, or mock:[?options]");
  sub->add_option("--qa-endpoint", g.qa_endpoint, "Extractive QA URL (default <endpoint>/qa)");
  sub->add_option("--api-key-env", g.api_key_env, "Environment variable holding the API key");
  sub->add_option("--context-window", g.context_window, "Scorer context window in tokens")
      ->check(CLI::PositiveNumber);
  sub->add_option("--timeout", g.timeout, "Per-request timeout in seconds")
      ->check(CLI::PositiveNumber);
  sub->add_option("--cache-dir", g.cache_dir, "On-disk response cache directory");
  sub->add_flag("--no-cache", g.no_cache, "Disable the response cache");
  sub->add_option("--rpm", g.rpm, "Request rate limit per minute (0 = unlimited)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--burst", g.burst, "Rate limiter burst size")->check(CLI::PositiveNumber);
  sub->add_option("--max-retries", g.max_retries, "Retries for transient failures")
      ->check(CLI::NonNegativeNumber);
}

std::unique_ptr<Gateway> make_gateway(const GatewayFlags& g) {
  EndpointConfig config;
  config.url = g.endpoint;
  config.qa_url = g.qa_endpoint;
  config.api_key_env = g.api_key_env;
  config.max_context_tokens = g.context_window;
  config.timeout = std::chrono::seconds(g.timeout);
  GatewayOptions options;
  options.cache_enabled = !g.no_cache;
  if (!g.cache_dir.empty()) options.cache_dir = fs::path(g.cache_dir);
  options.retry.max_retries = g.max_retries;
  options.requests_per_minute = g.rpm;
  options.burst = g.burst;
  return std::make_unique<Gateway>(make_endpoint(config), options);
}

Corpus load_corpus(const fs::path& path) {
  if (path.extension() == ".json") return ingest_squad(path);
  return ingest_jsonl(path);
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

fs::path write_run_manifest(const RunParameters& params, const fs::path& artifact) {
  const auto path = manifest_path_for(artifact);
  write_manifest(manifest_for(params), path);
  return path;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::pair<std::string, std::string> split_assignment(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
    throw Error(ErrorKind::kArgument, "expected LABEL=PATH, got '" + item + "'");
  }
  return {item.substr(0, eq), item.substr(eq + 1)};
}

std::string env_name(std::string flag) {
  for (auto& c : flag) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return "QGSYNTH_" + flag;
}

bool truthy(std::string_view v) {
  std::string s = to_lower(v);
  return s == "1" || s == "true" || s == "yes" || s == "on";
}

bool mentioned(const std::vector<std::string>& args, const std::string& lname) {
  const std::string flag = "--" + lname;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

const CLI::Option* find_long_option(const std::vector<CLI::App*>& chain, std::string_view token) {
  const std::string name(token.substr(2));
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (const CLI::Option* opt : (*it)->get_options()) {
      const auto& names = opt->get_lnames();
      if (std::find(names.begin(), names.end(), name) != names.end()) return opt;
    }
  }
  return nullptr;
}

// Adds "--flag=value" for every QGSYNTH_<FLAG> variable whose flag was not
// given on the command line. CLI11 lets config files override its own env
// support, so the variables are resolved here instead.
std::vector<std::string> with_env_defaults(CLI::App& app, std::vector<std::string> args) {
  std::vector<CLI::App*> chain{&app};
  std::vector<std::size_t> insert_at{0};
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) == 0) {
      if (a.find('=') != std::string::npos) continue;
      const CLI::Option* opt = find_long_option(chain, a);
      if (opt && opt->get_type_size() > 0) ++i;
      continue;
    }
    if (CLI::App* sub = chain.back()->get_subcommand_no_throw(a)) {
      chain.push_back(sub);
      insert_at.push_back(i + 1);
    }
  }
  for (std::size_t level = chain.size(); level-- > 0;) {
    std::vector<std::string> extra;
    for (const CLI::Option* opt : chain[level]->get_options()) {
      if (opt->get_lnames().empty() || opt->get_items_expected_max() > 1) continue;
      const std::string& lname = opt->get_lnames().front();
      if (lname == "help" || lname == "version" || mentioned(args, lname)) continue;
      const char* value = std::getenv(env_name(lname).c_str());
      if (value == nullptr) continue;
      if (opt->get_type_size() == 0) {
        if (truthy(value)) extra.push_back("--" + lname);
      } else {
        extra.push_back("--" + lname + "=" + value);
      }
    }
    args.insert(args.begin() + static_cast<long>(insert_at[level]), extra.begin(), extra.end());
  }
  return args;
}

void setup_logging(const std::string& level) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("qgsynth");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  });
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") {
    throw Error(ErrorKind::kArgument, "unknown log level '" + level + "'");
  }
  spdlog::set_level(lvl);
}

void print_error(std::ostream& err, std::string_view kind, std::string_view message, int code) {
  nlohmann::json line = {{"error", kind}, {"message", message}, {"exit_code", code}};
  err << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string format = "squad";
  std::string in;
  std::string out;
  std::string source = "generic";
  std::size_t sample = 0;
  double test_fraction = 0.0;
  std::string test_out;
  std::uint64_t seed = 0;
};

int do_ingest(const IngestArgs& a, std::ostream& out) {
  Corpus corpus = a.format == "squad" ? ingest_squad(a.in)
                                      : ingest_jsonl(a.in, source_from_string(a.source));
  const std::size_t skipped = corpus.provenance().skipped;
  RunParameters p;
  p.command = "ingest";
  p.inputs["source"] = a.in;
  p.parameters["format"] = a.format;
  p.parameters["skipped"] = std::to_string(skipped);
  if (a.format == "jsonl") p.parameters["source"] = a.source;
  if (a.sample > 0) {
    corpus = sample_subset(corpus, a.sample, a.seed);
    p.seeds["sample"] = a.seed;
    p.subset_size = a.sample;
  }
  ensure_parent(a.out);
  if (a.test_fraction > 0.0) {
    if (a.test_out.empty()) {
      throw Error(ErrorKind::kArgument, "--test-fraction requires --test-out");
    }
    ensure_parent(a.test_out);
    Split s = split(corpus, a.test_fraction, a.seed);
    write_jsonl(s.train, a.out);
    write_jsonl(s.test, a.test_out);
    p.seeds["split"] = a.seed;
    p.parameters["test_fraction"] = std::to_string(a.test_fraction);
    p.outputs["corpus"] = a.out;
    p.outputs["test"] = a.test_out;
    write_run_manifest(p, a.out);
    write_run_manifest(p, a.test_out);
    out << "ingested " << corpus.size() << " pairs (skipped " << skipped << "): " << s.train.size()
        << " train -> " << a.out << ", " << s.test.size() << " test -> " << a.test_out << "\n";
    return kOk;
  }
  write_jsonl(corpus, a.out);
  p.outputs["corpus"] = a.out;
  write_run_manifest(p, a.out);
  out << "ingested " << corpus.size() << " pairs (skipped " << skipped << ") -> " << a.out << "\n";
  return kOk;
}

struct SynthesizeArgs {
  std::string corpus;
  std::string style = "squad_wiki";
  std::string mode = "zero";
  std::string exemplars;
  std::string out;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.9;
  double top_p = 1.0;
  int max_output_tokens = 512;
  std::size_t parallelism = 4;
  std::string layout = "chat";
  double max_failure_rate = 0.10;
  GatewayFlags gateway;
};

int do_synthesize(const SynthesizeArgs& a, std::ostream& out, std::stop_token stop) {
  const Corpus corpus = load_corpus(a.corpus);
  PromptPreset preset = resolve_preset(a.style);
  if (!a.exemplars.empty()) preset.exemplars = load_exemplars(a.exemplars);
  ensure_parent(a.out);

  if (a.mode == "real") {
    write_triplets(attach_real_contexts(corpus), a.out);
    RunParameters p;
    p.command = "synthesize";
    p.inputs["corpus"] = a.corpus;
    p.outputs["triplets"] = a.out;
    p.mode = "real";
    p.subset_size = corpus.size();
    write_run_manifest(p, a.out);
    out << "attached " << corpus.size() << " real contexts -> " << a.out << "\n";
    return kOk;
  }

  auto gateway = make_gateway(a.gateway);
  SynthesisOptions options;
  options.mode = a.mode == "few" ? PromptMode::kFewShot : PromptMode::kZeroShot;
  options.layout = layout_from_string(a.layout);
  options.model_name = a.model;
  options.temperature = a.temperature;
  options.top_p = a.top_p;
  options.max_output_tokens = a.max_output_tokens;
  options.parallelism = a.parallelism;
  options.max_failure_rate = a.max_failure_rate;
  options.output_path = a.out;
  options.stop = stop;
  SynthesisRun run = synthesize(corpus, preset, *gateway, options);

  run.parameters.inputs["corpus"] = a.corpus;
  if (!a.exemplars.empty()) run.parameters.inputs["exemplars"] = a.exemplars;
  run.parameters.style_preset = a.style;
  write_run_manifest(run.parameters, a.out);
  out << "synthesized " << run.completed << " contexts (" << run.already_present
      << " already present, " << run.failed.size() << " failed, " << gateway->backend_calls()
      << " backend calls) -> " << a.out << "\n";
  for (const auto& f : run.failed) {
    out << "  failed " << f.pair_id << ": " << to_string(f.kind) << ": " << f.message << "\n";
  }
  if (run.interrupted) {
    out << "interrupted; re-run the same command to resume\n";
    return kInterrupted;
  }
  return kOk;
}

struct MixArgs {
  std::string real;
  std::string synthetic;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string strategy = "monotone_prefix";
  std::string out;
};

int do_mix(const MixArgs& a, std::ostream& out) {
  const auto mixed = mix(read_triplets(a.real), read_triplets(a.synthetic), a.fraction, a.seed,
                         mix_strategy_from_string(a.strategy));
  const auto n_synthetic = static_cast<std::size_t>(std::count_if(
      mixed.begin(), mixed.end(), [](const Triplet& t) { return is_synthetic(t.context_kind); }));
  ensure_parent(a.out);
  write_triplets(mixed, a.out);
  RunParameters p;
  p.command = "mix";
  p.inputs["real"] = a.real;
  p.inputs["synthetic"] = a.synthetic;
  p.outputs["triplets"] = a.out;
  p.seeds["mix"] = a.seed;
  p.mix_fraction = a.fraction;
  p.subset_size = mixed.size();
  p.parameters["strategy"] = a.strategy;
  p.parameters["synthetic_count"] = std::to_string(n_synthetic);
  write_run_manifest(p, a.out);
  out << "mixed " << mixed.size() << " pairs: " << n_synthetic << " synthetic, "
      << mixed.size() - n_synthetic << " real -> " << a.out << "\n";
  return kOk;
}

struct EmitArgs {
  std::string triplets;
  std::string style = "squad_wiki";
  std::size_t max_input_tokens = 512;
  std::string out;
};

int do_emit(const EmitArgs& a, std::ostream& out) {
  const PromptPreset preset = resolve_preset(a.style);
  ensure_parent(a.out);
  const EmitReport r = emit_trainset(read_triplets(a.triplets), preset.style, a.out,
                                     a.max_input_tokens);
  RunParameters p;
  p.command = "emit";
  p.inputs["triplets"] = a.triplets;
  p.outputs["trainset"] = a.out;
  p.style_preset = a.style;
  p.style_fingerprint = style_fingerprint(preset);
  p.subset_size = r.count;
  p.parameters["max_input_tokens"] = std::to_string(a.max_input_tokens);
  p.parameters["truncated_count"] = std::to_string(r.truncated_count);
  write_run_manifest(p, a.out);
  out << "emitted " << r.count << " records (" << r.truncated_count << " truncated) -> " << a.out
      << "\n";
  return kOk;
}

struct ScoreArgs {
  std::string pred;
  std::string gold;
  std::string out;
  std::string external;
  std::string csv;
};

int do_score(const ScoreArgs& a, std::ostream& out) {
  const auto preds = read_predictions(a.pred);
  const auto golds = read_gold_questions(a.gold);
  std::map<std::string, double> external;
  if (!a.external.empty()) external = read_external_scores(a.external);
  const MetricReport report = score_corpus(preds, golds, a.external.empty() ? nullptr : &external);
  ensure_parent(a.out);
  write_report_json(report, a.out);
  RunParameters p;
  p.command = "score";
  p.inputs["predictions"] = a.pred;
  p.inputs["gold"] = a.gold;
  if (!a.external.empty()) p.inputs["external_scores"] = a.external;
  p.outputs["report"] = a.out;
  if (!a.csv.empty()) {
    ensure_parent(a.csv);
    write_report_csv(report, a.csv);
    p.outputs["report_csv"] = a.csv;
    write_run_manifest(p, a.csv);
  }
  write_run_manifest(p, a.out);
  const auto& c = report.corpus;
  out << "bleu4=" << fmt3(c.bleu4) << " meteor=" << fmt3(c.meteor) << " rouge_l=" << fmt3(c.rouge_l)
      << " em=" << fmt3(c.em_rate) << " f1=" << fmt3(c.mean_f1);
  if (c.external) out << " external=" << fmt3(*c.external);
  out << " n=" << report.n << "\n";
  return kOk;
}

struct QualityArgs {
  std::string triplets;
  std::string out;
  std::string scorer = "gpt2";
  std::size_t bins = 20;
  std::string containment = "normalized";
  std::size_t review_cap = 100;
  std::uint64_t seed = 0;
  bool no_perplexity = false;
  bool no_qa_probe = false;
  std::size_t parallelism = 4;
  GatewayFlags gateway;
};

int do_quality(const QualityArgs& a, std::ostream& out) {
  const auto triplets = read_triplets(a.triplets);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  RunParameters p;
  p.command = "quality";
  p.inputs["triplets"] = a.triplets;
  p.seeds["review"] = a.seed;
  p.subset_size = triplets.size();
  p.parameters["containment_mode"] = a.containment;
  p.parameters["bins"] = std::to_string(a.bins);

  write_histograms({length_stats(triplets, a.bins)}, dir / "length_histogram.json");
  p.outputs["length_histogram"] = dir / "length_histogram.json";

  std::unique_ptr<Gateway> gateway;
  if (!a.no_perplexity || !a.no_qa_probe) {
    gateway = make_gateway(a.gateway);
    p.gateway = GatewayFingerprint{gateway->endpoint().describe(), "", a.scorer, 0.0, 1.0, 0};
  }

  QualitySummary summary;
  if (!a.no_perplexity) {
    const auto ppl = perplexity_stats(triplets, *gateway, a.scorer, a.bins, a.parallelism);
    std::vector<Histogram> hists;
    std::string csv = csv_row({"pair_id", "context_kind", "perplexity"});
    for (const auto& s : ppl.series) {
      hists.push_back(s.histogram);
      for (const auto& [id, v] : s.values) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        csv += csv_row({id, std::string(to_string(s.kind)), buf});
      }
    }
    for (const auto& e : ppl.errors) {
      spdlog::warn("perplexity {}: {} ({})", e.pair_id, e.message, to_string(e.kind));
    }
    write_histograms(hists, dir / "perplexity_histograms.json");
    write_file_atomic(dir / "perplexity_values.csv", csv);
    p.outputs["perplexity_histograms"] = dir / "perplexity_histograms.json";
    p.outputs["perplexity_values"] = dir / "perplexity_values.csv";
    p.parameters["perplexity_errors"] = std::to_string(ppl.errors.size());
  }

  std::vector<Triplet> synthetic;
  std::copy_if(triplets.begin(), triplets.end(), std::back_inserter(synthetic),
               [](const Triplet& t) { return is_synthetic(t.context_kind); });
  const auto& contained = synthetic.empty() ? triplets : synthetic;
  const ContainmentResult containment =
      containment_rate(contained, containment_mode_from_string(a.containment));
  summary.containment_rate = containment.rate;
  summary.n = triplets.size();
  {
    nlohmann::json j = {{"rate", containment.rate},
                        {"hits", containment.hits},
                        {"n", containment.n},
                        {"mode", a.containment},
                        {"scope", synthetic.empty() ? "all" : "synthetic"},
                        {"misses", containment.misses}};
    write_file_atomic(dir / "containment.json", j.dump(2) + "\n");
    p.outputs["containment"] = dir / "containment.json";
  }

  std::map<std::string, std::string> probe_answers;
  std::set<std::string> review_ids(containment.misses.begin(), containment.misses.end());
  if (!a.no_qa_probe) {
    const QAProbeReport probe = qa_probe(triplets, *gateway, a.parallelism);
    summary.em_rate = probe.em_rate;
    summary.mean_f1 = probe.mean_f1;
    summary.skips = probe.skips;
    std::string csv = csv_row({"pair_id", "predicted", "em", "f1", "skipped"});
    for (const auto& ex : probe.per_example) {
      char f1[64];
      std::snprintf(f1, sizeof f1, "%.17g", ex.f1);
      csv += csv_row({ex.pair_id, ex.predicted, std::to_string(ex.em), f1,
                      ex.skipped ? ex.skipped->message : ""});
      probe_answers[ex.pair_id] = ex.predicted;
      if (!ex.skipped && ex.em == 0) review_ids.insert(ex.pair_id);
    }
    write_file_atomic(dir / "qa_probe.csv", csv);
    p.outputs["qa_probe"] = dir / "qa_probe.csv";
  }

  std::vector<ReviewCase> cases;
  for (const auto& t : triplets) {
    if (!review_ids.count(t.pair_id)) continue;
    cases.push_back({t.pair_id, t.question, {t.answer}, t.context, probe_answers[t.pair_id]});
  }
  const std::size_t rows =
      review_worksheet(cases, dir / "review_worksheet.csv", a.review_cap, a.seed);
  p.outputs["review_worksheet"] = dir / "review_worksheet.csv";

  write_quality_summary(summary, dir / "summary.json");
  p.outputs["summary"] = dir / "summary.json";
  write_run_manifest(p, dir);

  out << "containment=" << fmt3(containment.rate) << " (" << containment.hits << "/"
      << containment.n << ")";
  if (summary.em_rate) {
    out << " em=" << fmt3(*summary.em_rate) << " f1=" << fmt3(*summary.mean_f1)
        << " skips=" << summary.skips;
  }
  out << " review_rows=" << rows << " -> " << dir.string() << "\n";
  return kOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> metrics{"bleu4", "meteor", "rouge_l"};
  std::string out;
  std::string manifest;
};

int do_report_table(const ReportArgs& a, std::ostream& out) {
  std::vector<LabeledReport> reports;
  RunParameters p;
  p.command = "report table";
  for (const auto& item : a.inputs) {
    auto [label, path] = split_assignment(item);
    reports.emplace_back(label, read_report_json(path));
    p.inputs[label] = path;
  }
  ensure_parent(a.out);
  table_compare(reports, a.out);
  p.outputs["table"] = a.out;
  write_run_manifest(p, a.out);
  out << "table with " << reports.size() << " rows -> " << a.out << "\n";
  return kOk;
}

int do_report_curve(const ReportArgs& a, std::ostream& out) {
  std::vector<CurvePoint> points;
  RunParameters p;
  p.command = "report curve";
  for (const auto& item : a.inputs) {
    auto [label, path] = split_assignment(item);
    double fraction = 0.0;
    try {
      std::size_t used = 0;
      fraction = std::stod(label, &used);
      if (used != label.size()) throw std::invalid_argument(label);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kArgument, "curve inputs must be FRACTION=PATH, got '" + item + "'");
    }
    points.push_back({fraction, read_report_json(path)});
    p.inputs["fraction=" + label] = path;
  }
  ensure_parent(a.out);
  curve_data(points, a.out, a.metrics);
  p.outputs["curve"] = a.out;
  p.parameters["metrics"] = join(a.metrics, ",");
  write_run_manifest(p, a.out);
  out << "curve with " << points.size() * a.metrics.size() << " rows -> " << a.out << "\n";
  return kOk;
}

int do_report_verify(const ReportArgs& a, std::ostream& out) {
  fs::path path = a.manifest;
  const std::string name = path.filename().string();
  const bool is_manifest =
      name == "manifest.json" ||
      (name.size() > 14 && name.compare(name.size() - 14, 14, ".manifest.json") == 0);
  if (!is_manifest) path = manifest_path_for(path);
  const VerifyResult result = verify_manifest_files(read_manifest(path));
  if (result.ok()) {
    out << "ok " << path.string() << "\n";
    return kOk;
  }
  out << "drift " << path.string() << "\n";
  for (const auto& d : result.diffs) {
    out << "  " << d.field << ": recorded " << d.recorded << ", now " << d.current << "\n";
  }
  return kVerifyFailed;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument: return kUsage;
    case ErrorKind::kIo: return kIoFailure;
    case ErrorKind::kParse: return kParseFailure;
    case ErrorKind::kEmptyCorpus: return kEmptyInput;
    case ErrorKind::kValidation: return kInvalidData;
    case ErrorKind::kMismatch: return kIdMismatch;
    case ErrorKind::kAuth: return kAuthFailure;
    case ErrorKind::kRateLimited: return kRateLimitedFailure;
    case ErrorKind::kMalformedPayload: return kBadPayload;
    case ErrorKind::kUnavailable: return kEndpointUnavailable;
    case ErrorKind::kOverflow: return kContextOverflow;
    case ErrorKind::kThresholdExceeded: return kTooManyFailures;
  }
  return kInternal;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err,
        std::stop_token stop) {
  CLI::App app{"Synthetic-context question generation toolkit", "qgsynth"};
  app.set_version_flag("--version", std::string(QGSYNTH_VERSION));
  app.set_config("--config", "", "TOML config file; [subcommand] sections set subcommand flags");
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load a QA corpus into canonical JSONL");
  c_ingest->add_option("--format", ingest.format, "Input format")
      ->check(CLI::IsMember({"squad", "jsonl"}));
  c_ingest->add_option("--in", ingest.in, "Input file")->required();
  c_ingest->add_option("--out", ingest.out, "Output corpus JSONL")->required();
  c_ingest->add_option("--source", ingest.source, "Source tag for jsonl input")
      ->check(CLI::IsMember({"squad", "osbio", "generic"}));
  c_ingest->add_option("--sample", ingest.sample, "Keep a seeded subset of N pairs");
  c_ingest->add_option("--test-fraction", ingest.test_fraction, "Hold out this share as test")
      ->check(CLI::Range(0.0, 1.0));
  c_ingest->add_option("--test-out", ingest.test_out, "Output path for the test split");
  c_ingest->add_option("--seed", ingest.seed, "Seed for sampling and splitting");

  SynthesizeArgs synth;
  auto* c_synth = app.add_subcommand("synthesize", "Generate contexts for every QA pair");
  c_synth->add_option("--corpus", synth.corpus, "Corpus JSONL (or SQuAD .json)")->required();
  c_synth->add_option("--style", synth.style, "Preset name or preset JSON path");
  c_synth->add_option("--mode", synth.mode, "zero|few, or real to attach gold contexts")
      ->check(CLI::IsMember({"zero", "few", "real"}));
  c_synth->add_option("--exemplars", synth.exemplars, "Exemplar JSON replacing the preset's");
  c_synth->add_option("--out", synth.out, "Triplet JSONL (appended, resumable)")->required();
  c_synth->add_option("--model", synth.model, "Generator model name");
  c_synth->add_option("--temperature", synth.temperature)->check(CLI::Range(0.0, 2.0));
  c_synth->add_option("--top-p", synth.top_p)->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--max-output-tokens", synth.max_output_tokens)
      ->check(CLI::PositiveNumber);
  c_synth->add_option("--parallelism", synth.parallelism, "Concurrent requests")
      ->check(CLI::PositiveNumber);
  c_synth->add_option("--layout", synth.layout, "chat|single_user")
      ->check(CLI::IsMember({"chat", "single_user"}));
  c_synth->add_option("--max-failure-rate", synth.max_failure_rate,
                      "Abort when failures exceed this share of pending pairs")
      ->check(CLI::Range(0.0, 1.0));
  add_gateway_flags(c_synth, synth.gateway);

  MixArgs mixa;
  auto* c_mix = app.add_subcommand("mix", "Interpolate real and synthetic contexts");
  c_mix->add_option("--real", mixa.real, "Real-context triplets")->required();
  c_mix->add_option("--synthetic", mixa.synthetic, "Synthetic-context triplets")->required();
  c_mix->add_option("--fraction", mixa.fraction, "Share of pairs taking the synthetic context")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  c_mix->add_option("--seed", mixa.seed);
  c_mix->add_option("--strategy", mixa.strategy, "monotone_prefix|independent")
      ->check(CLI::IsMember({"monotone_prefix", "independent"}));
  c_mix->add_option("--out", mixa.out)->required();

  EmitArgs emit;
  auto* c_emit = app.add_subcommand("emit", "Write the training set (input/target JSONL)");
  c_emit->add_option("--triplets", emit.triplets)->required();
  c_emit->add_option("--style", emit.style, "Preset name or preset JSON path");
  c_emit->add_option("--max-input-tokens", emit.max_input_tokens, "0 disables truncation");
  c_emit->add_option("--out", emit.out)->required();

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Score predicted questions against gold");
  c_score->add_option("--pred", score.pred, "Predictions JSONL {pair_id, text}")->required();
  c_score->add_option("--gold", score.gold, "Triplet or corpus JSONL")->required();
  c_score->add_option("--out", score.out, "Report JSON")->required();
  c_score->add_option("--external-scores", score.external, "JSON {pair_id: score}");
  c_score->add_option("--csv", score.csv, "Also write a per-example CSV");

  QualityArgs quality;
  auto* c_quality = app.add_subcommand("quality", "Context length, perplexity and QA checks");
  c_quality->add_option("--triplets", quality.triplets)->required();
  c_quality->add_option("--out", quality.out, "Output directory")->required();
  c_quality->add_option("--scorer", quality.scorer, "Model used for token logprobs");
  c_quality->add_option("--bins", quality.bins)->check(CLI::PositiveNumber);
  c_quality->add_option("--containment", quality.containment, "normalized|raw")
      ->check(CLI::IsMember({"normalized", "raw"}));
  c_quality->add_option("--review-cap", quality.review_cap, "Rows in the review worksheet");
  c_quality->add_option("--seed", quality.seed, "Seed for the review sample");
  c_quality->add_flag("--no-perplexity", quality.no_perplexity);
  c_quality->add_flag("--no-qa-probe", quality.no_qa_probe);
  c_quality->add_option("--parallelism", quality.parallelism)->check(CLI::PositiveNumber);
  add_gateway_flags(c_quality, quality.gateway);

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Tables, curve data and manifest checks");
  c_report->require_subcommand(1);
  auto* c_table = c_report->add_subcommand("table", "Compare labeled score reports");
  c_table->add_option("--inputs", report.inputs, "LABEL=REPORT.json ...")->required();
  c_table->add_option("--out", report.out, ".csv or .md")->required();
  auto* c_curve = c_report->add_subcommand("curve", "Metric values against mix fraction");
  c_curve->add_option("--inputs", report.inputs, "FRACTION=REPORT.json ...")->required();
  c_curve->add_option("--metrics", report.metrics, "Comma-separated metric names")
      ->delimiter(',');
  c_curve->add_option("--out", report.out)->required();
  auto* c_verify = c_report->add_subcommand("verify", "Re-hash the files a manifest recorded");
  c_verify->add_option("--manifest", report.manifest, "Manifest, or the artifact it describes")
      ->required();

  try {
    const auto args = with_env_defaults(app, raw_args);
    std::vector<const char*> argv{"qgsynth"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        app.exit(e, out, err);
        return kOk;
      }
      print_error(err, "usage", e.what(), kUsage);
      return kUsage;
    }
    setup_logging(log_level);

    if (c_ingest->parsed()) return do_ingest(ingest, out);
    if (c_synth->parsed()) return do_synthesize(synth, out, stop);
    if (c_mix->parsed()) return do_mix(mixa, out);
    if (c_emit->parsed()) return do_emit(emit, out);
    if (c_score->parsed()) return do_score(score, out);
    if (c_quality->parsed()) return do_quality(quality, out);
    if (c_table->parsed()) return do_report_table(report, out);
    if (c_curve->parsed()) return do_report_curve(report, out);
    if (c_verify->parsed()) return do_report_verify(report, out);
    return kUsage;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    print_error(err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const fs::filesystem_error& e) {
    print_error(err, "io", e.what(), kIoFailure);
    return kIoFailure;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), kInternal);
    return kInternal;
  }
}

}  // namespace qgsynth::cli
