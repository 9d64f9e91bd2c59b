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

#include "qgsynth/triplet.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "qgsynth/error.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {

using nlohmann::json;

std::string_view to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::kReal: return "real";
    case ContextKind::kSyntheticZero: return "synthetic_zero";
    case ContextKind::kSyntheticFew: return "synthetic_few";
  }
  return "real";
}

ContextKind context_kind_from_string(std::string_view name) {
  if (name == "real") return ContextKind::kReal;
  if (name == "synthetic_zero") return ContextKind::kSyntheticZero;
  if (name == "synthetic_few") return ContextKind::kSyntheticFew;
  throw Error(ErrorKind::kParse, "unknown context_kind '" + std::string(name) + "'");
}

bool is_synthetic(ContextKind kind) { return kind != ContextKind::kReal; }

void validate_triplet(const Triplet& t) {
  if (t.pair_id.empty()) throw Error(ErrorKind::kValidation, "triplet with empty pair_id");
  if (trim(t.context).empty()) {
    throw Error(ErrorKind::kValidation, "triplet " + t.pair_id + ": empty context");
  }
  if (is_synthetic(t.context_kind) && !t.gen_meta) {
    throw Error(ErrorKind::kValidation, "triplet " + t.pair_id + ": synthetic without gen_meta");
  }
  if (!is_synthetic(t.context_kind) && t.gen_meta) {
    throw Error(ErrorKind::kValidation, "triplet " + t.pair_id + ": real context with gen_meta");
  }
}

std::string to_json_line(const Triplet& t, bool with_timestamp) {
  json record = {{"pair_id", t.pair_id},
                 {"question", t.question},
                 {"answer", t.answer},
                 {"context", t.context},
                 {"context_kind", to_string(t.context_kind)}};
  if (t.gen_meta) {
    const GenerationMeta& g = *t.gen_meta;
    json prompt = json::array();
    for (const auto& m : g.prompt) prompt.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    json meta = {{"model_name", g.model_name},
                 {"request_key", g.request_key},
                 {"prompt_snapshot_hash", g.prompt_snapshot_hash},
                 {"prompt", prompt},
                 {"temperature", g.temperature},
                 {"top_p", g.top_p},
                 {"max_output_tokens", g.max_output_tokens},
                 {"finish_reason", g.finish_reason},
                 {"too_long_risk", g.too_long_risk}};
    if (with_timestamp) meta["timestamp"] = g.timestamp;
    record["gen_meta"] = std::move(meta);
  }
  return record.dump();
}

Triplet triplet_from_json_line(std::string_view line) {
  Triplet t;
  try {
    const json record = json::parse(line);
    t.pair_id = record.at("pair_id").get<std::string>();
    t.question = record.at("question").get<std::string>();
    t.answer = record.at("answer").get<std::string>();
    t.context = record.at("context").get<std::string>();
    t.context_kind = context_kind_from_string(record.at("context_kind").get<std::string>());
    if (auto it = record.find("gen_meta"); it != record.end() && !it->is_null()) {
      GenerationMeta g;
      g.model_name = it->at("model_name").get<std::string>();
      g.request_key = it->at("request_key").get<std::string>();
      g.timestamp = it->value("timestamp", std::string());
      g.prompt_snapshot_hash = it->at("prompt_snapshot_hash").get<std::string>();
      for (const json& m : it->value("prompt", json::array())) {
        g.prompt.push_back({role_from_string(m.at("role").get<std::string>()),
                            m.at("content").get<std::string>()});
      }
      g.temperature = it->value("temperature", 0.0);
      g.top_p = it->value("top_p", 1.0);
      g.max_output_tokens = it->value("max_output_tokens", 0);
      g.finish_reason = it->value("finish_reason", std::string());
      g.too_long_risk = it->value("too_long_risk", false);
      t.gen_meta = std::move(g);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("triplet record: ") + e.what());
  }
  validate_triplet(t);
  return t;
}

std::vector<Triplet> read_triplets(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  std::vector<Triplet> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < raw.size()) {
    std::size_t end = raw.find('\n', start);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = raw.size();
    ++line_no;
    const std::string_view line = std::string_view(raw).substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    try {
      out.push_back(triplet_from_json_line(line));
    } catch (const Error& e) {
      if (!terminated && e.kind() == ErrorKind::kParse) break;  // interrupted write
      throw Error(e.kind(), path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Triplet& a, const Triplet& b) { return a.pair_id < b.pair_id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].pair_id == out[i - 1].pair_id) {
      throw Error(ErrorKind::kValidation, path.string() + ": duplicate pair_id " + out[i].pair_id);
    }
  }
  return out;
}

void write_triplets(const std::vector<Triplet>& triplets, const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : triplets) {
    out += to_json_line(t);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::string canonical_hash(std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.pair_id < b.pair_id; });
  std::string serialized;
  for (const auto& t : triplets) {
    serialized += to_json_line(t, /*with_timestamp=*/false);
    serialized += '\n';
  }
  return sha256_hex(serialized);
}

std::string canonical_file_hash(const std::filesystem::path& path) {
  return canonical_hash(read_triplets(path));
}

}  // namespace qgsynth
