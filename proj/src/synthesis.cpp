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

#include "qgsynth/synthesis.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "qgsynth/metrics.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {
namespace {

// Drops an unterminated trailing line left behind by an interrupted writer.
void repair_trailing_line(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  if (raw.empty() || raw.back() == '\n') return;
  const auto last = raw.rfind('\n');
  const std::size_t keep = last == std::string::npos ? 0 : last + 1;
  spdlog::warn("{}: discarding {} bytes of partial trailing line", path.string(),
               raw.size() - keep);
  std::filesystem::resize_file(path, keep);
}

std::set<std::string> existing_ids(const std::filesystem::path& path) {
  std::set<std::string> ids;
  if (!std::filesystem::exists(path)) return ids;
  repair_trailing_line(path);
  for (auto& t : read_triplets(path)) ids.insert(std::move(t.pair_id));
  return ids;
}

ContextKind kind_for(PromptMode mode) {
  return mode == PromptMode::kZeroShot ? ContextKind::kSyntheticZero : ContextKind::kSyntheticFew;
}

}  // namespace

std::string_view to_string(ContainmentMode mode) {
  return mode == ContainmentMode::kRaw ? "raw" : "normalized";
}

ContainmentMode containment_mode_from_string(std::string_view name) {
  if (name == "normalized") return ContainmentMode::kNormalized;
  if (name == "raw") return ContainmentMode::kRaw;
  throw Error(ErrorKind::kArgument,
              "unknown containment mode '" + std::string(name) + "' (expected normalized|raw)");
}

bool contains_answer(std::string_view context, std::string_view answer, ContainmentMode mode) {
  if (mode == ContainmentMode::kRaw) {
    return !answer.empty() && context.find(answer) != std::string_view::npos;
  }
  return contains_normalized(context, answer);
}

ContextFlags validate_context(std::string_view context, const std::vector<std::string>& answers,
                              LengthLimits limits, ContainmentMode mode) {
  ContextFlags flags;
  flags.empty = trim(context).empty();
  const std::size_t words = word_count(context);
  flags.too_short = words < limits.min_words;
  flags.too_long = words > limits.max_words;
  for (const auto& a : answers) {
    if (contains_answer(context, a, mode)) {
      flags.contains_answer = true;
      break;
    }
  }
  return flags;
}

std::vector<Triplet> attach_real_contexts(const Corpus& corpus) {
  std::vector<Triplet> out;
  std::vector<std::string> missing;
  for (const auto& p : corpus) {
    if (!p.real_context || trim(*p.real_context).empty()) {
      missing.push_back(p.id);
      continue;
    }
    out.push_back({p.id, p.question, p.answers.front(), *p.real_context, ContextKind::kReal, {}});
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kValidation, std::to_string(missing.size()) +
                                            " pair(s) have no real context: " +
                                            join(missing, ", "));
  }
  return out;
}

std::string style_fingerprint(const PromptPreset& preset) {
  std::string material = preset.style.context_style_text + "\n" +
                         preset.style.question_style_text + "\n";
  for (const auto& e : preset.exemplars) {
    material += e.title.value_or("") + "\x1f" + e.context + "\x1f" + e.question + "\x1f" +
                e.answer + "\n";
  }
  return sha256_hex(material);
}

SynthesisRun synthesize(const Corpus& corpus, const PromptPreset& preset, Gateway& gateway,
                        const SynthesisOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "synthesize: corpus is empty");
  if (options.output_path.empty()) {
    throw Error(ErrorKind::kArgument, "synthesize: output path is required");
  }
  if (options.max_failure_rate < 0.0 || options.max_failure_rate > 1.0) {
    throw Error(ErrorKind::kArgument, "synthesize: max failure rate must lie in [0, 1]");
  }
  if (options.mode == PromptMode::kFewShot) {
    if (preset.exemplars.empty()) {
      throw Error(ErrorKind::kArgument,
                  "synthesize: few-shot mode needs at least one exemplar in the preset");
    }
    for (const auto& e : preset.exemplars) validate_exemplar(e);
  }
  {
    // Checks the sampling settings once, before any pair is attempted.
    CompletionRequest probe{options.model_name, Prompt{{{Role::kUser, "probe"}}, {}},
                            options.temperature, options.top_p, options.max_output_tokens};
    probe.validate();
  }

  SynthesisRun run;
  run.output_path = options.output_path;
  if (options.output_path.has_parent_path()) {
    std::filesystem::create_directories(options.output_path.parent_path());
  }
  const auto done = existing_ids(options.output_path);

  std::vector<const QAPair*> pending;
  for (const auto& p : corpus) {
    if (done.count(p.id)) {
      ++run.already_present;
    } else {
      pending.push_back(&p);
    }
  }
  if (run.already_present > 0) {
    spdlog::info("resuming: {} of {} pairs already synthesized", run.already_present,
                 corpus.size());
  }

  std::ofstream out(options.output_path, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot open " + options.output_path.string() + " for appending");
  }

  const double failure_budget = options.max_failure_rate * static_cast<double>(pending.size());
  const ContextKind kind = kind_for(options.mode);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::exception_ptr fatal;

  auto process = [&](const QAPair& pair) {
    Prompt prompt = build_context_prompt(pair, preset.style, preset.exemplars, options.mode,
                                         options.layout);
    CompletionRequest request{options.model_name, std::move(prompt), options.temperature,
                              options.top_p, options.max_output_tokens};
    const CompletionResponse response = gateway.complete(request);
    if (response.finish_reason == FinishReason::kError || trim(response.text).empty()) {
      throw Error(ErrorKind::kMalformedPayload, "backend returned no context");
    }
    Triplet t{pair.id, pair.question, pair.answers.front(), std::string(trim(response.text)),
              kind, GenerationMeta{}};
    auto& meta = *t.gen_meta;
    meta.model_name = options.model_name;
    meta.request_key = request.request_key();
    meta.timestamp = utc_timestamp();
    meta.prompt_snapshot_hash = request.prompt.snapshot_hash();
    meta.prompt = request.prompt.messages;
    meta.temperature = options.temperature;
    meta.top_p = options.top_p;
    meta.max_output_tokens = options.max_output_tokens;
    meta.finish_reason = std::string(to_string(response.finish_reason));
    meta.too_long_risk = response.finish_reason == FinishReason::kLength;
    return to_json_line(t) + "\n";
  };

  auto worker = [&] {
    while (!abort.load() && !options.stop.stop_requested()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const QAPair& pair = *pending[i];
      try {
        const std::string line = process(pair);
        std::lock_guard lock(mu);
        out << line;
        out.flush();
        if (!out) throw Error(ErrorKind::kIo, "write failed: " + options.output_path.string());
        ++run.attempted;
        ++run.completed;
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (e.kind() == ErrorKind::kIo) {
          if (!fatal) fatal = std::current_exception();
          abort = true;
          return;
        }
        spdlog::warn("{}: {} ({})", pair.id, e.what(), to_string(e.kind()));
        ++run.attempted;
        run.failed.push_back({pair.id, e.kind(), e.what()});
        if (static_cast<double>(run.failed.size()) > failure_budget) abort = true;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!fatal) fatal = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(options.parallelism, pending.size()));
  {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }
  out.close();
  if (fatal) std::rethrow_exception(fatal);

  run.interrupted = options.stop.stop_requested() &&
                    run.attempted < pending.size();

  run.parameters.command = "synthesize";
  if (!corpus.provenance().source_path.empty()) {
    run.parameters.inputs["corpus"] = corpus.provenance().source_path;
  }
  run.parameters.outputs["triplets"] = options.output_path;
  run.parameters.style_preset = std::string(to_string(preset.style.name));
  run.parameters.style_fingerprint = style_fingerprint(preset);
  run.parameters.mode = std::string(to_string(options.mode));
  run.parameters.subset_size = corpus.size();
  run.parameters.gateway = GatewayFingerprint{gateway.endpoint().describe(), options.model_name, "",
                                              options.temperature, options.top_p,
                                              options.max_output_tokens};
  run.parameters.parameters["layout"] = std::string(to_string(options.layout));
  run.parameters.parameters["corpus_content_hash"] = corpus.content_hash();
  run.parameters.parameters["max_failure_rate"] = std::to_string(options.max_failure_rate);

  if (abort.load()) {
    std::string msg = "synthesize: aborted after " + std::to_string(run.failed.size()) +
                      " failures (threshold " + std::to_string(options.max_failure_rate) +
                      " of " + std::to_string(pending.size()) + " pending pairs)";
    if (!run.failed.empty()) {
      msg += "; first: " + run.failed.front().pair_id + ": " + run.failed.front().message;
    }
    throw Error(ErrorKind::kThresholdExceeded, msg);
  }
  return run;
}

}  // namespace qgsynth
