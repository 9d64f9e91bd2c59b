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

#include "qgsynth/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "qgsynth/error.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {

using nlohmann::json;

std::string_view to_string(Source source) {
  switch (source) {
    case Source::kSquad: return "squad";
    case Source::kOsbio: return "osbio";
    case Source::kGeneric: return "generic";
  }
  return "generic";
}

Source source_from_string(std::string_view name) {
  if (name == "squad") return Source::kSquad;
  if (name == "osbio") return Source::kOsbio;
  if (name == "generic") return Source::kGeneric;
  throw Error(ErrorKind::kArgument, "unknown source '" + std::string(name) + "'");
}

Corpus::Corpus(std::vector<QAPair> pairs, std::string source_path) : pairs_(std::move(pairs)) {
  std::unordered_set<std::string> seen;
  std::string serialized;
  for (const auto& pair : pairs_) {
    if (pair.id.empty()) {
      throw Error(ErrorKind::kValidation, "pair with empty id");
    }
    if (!seen.insert(pair.id).second) {
      throw Error(ErrorKind::kValidation, "duplicate id '" + pair.id + "'");
    }
    if (trim(pair.question).empty()) {
      throw Error(ErrorKind::kValidation, "pair '" + pair.id + "': empty question");
    }
    if (pair.answers.empty()) {
      throw Error(ErrorKind::kValidation, "pair '" + pair.id + "': no answers");
    }
    for (const auto& answer : pair.answers) {
      if (trim(answer).empty()) {
        throw Error(ErrorKind::kValidation, "pair '" + pair.id + "': empty answer");
      }
    }
    serialized += to_json_line(pair);
    serialized += '\n';
  }
  provenance_.source_path = std::move(source_path);
  provenance_.content_hash = sha256_hex(serialized);
}

std::string to_json_line(const QAPair& pair) {
  json record = {
      {"id", pair.id},
      {"question", pair.question},
      {"answers", pair.answers},
      {"source", to_string(pair.source)},
  };
  if (pair.real_context) record["context"] = *pair.real_context;
  if (pair.title) record["title"] = *pair.title;
  return record.dump();
}

namespace {

const json& require(const json& node, const char* key, const std::string& where) {
  auto it = node.find(key);
  if (it == node.end()) {
    throw Error(ErrorKind::kParse, where + ": missing field " + key);
  }
  return *it;
}

std::string require_string(const json& node, const char* key, const std::string& where) {
  const json& value = require(node, key, where);
  if (!value.is_string()) {
    throw Error(ErrorKind::kParse, where + ": field " + key + " is not a string");
  }
  return value.get<std::string>();
}

void add_distinct(std::vector<std::string>& answers, std::string text) {
  if (std::find(answers.begin(), answers.end(), text) == answers.end()) {
    answers.push_back(std::move(text));
  }
}

}  // namespace

Corpus ingest_squad(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": malformed JSON at byte " +
                                       std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kParse, path.string() + ": top level is not an object");
  }
  const json& data = require(doc, "data", path.string());
  if (!data.is_array()) {
    throw Error(ErrorKind::kParse, path.string() + ": data is not an array");
  }
  if (data.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, path.string() + ": empty data array");
  }

  std::vector<QAPair> pairs;
  std::size_t skipped = 0;
  for (std::size_t a = 0; a < data.size(); ++a) {
    const json& article = data[a];
    const std::string where = path.string() + ": data[" + std::to_string(a) + "]";
    std::optional<std::string> title;
    if (auto it = article.find("title"); it != article.end() && it->is_string()) {
      title = nfc(it->get<std::string>());
    }
    for (const json& paragraph : require(article, "paragraphs", where)) {
      const std::string context = nfc(require_string(paragraph, "context", where));
      for (const json& qa : require(paragraph, "qas", where)) {
        const std::string id = require_string(qa, "id", where);
        if (qa.value("is_impossible", false)) {
          ++skipped;
          continue;
        }
        QAPair pair;
        pair.id = id;
        pair.question = nfc(require_string(qa, "question", where + " qa " + id));
        for (const json& answer : require(qa, "answers", where + " qa " + id)) {
          add_distinct(pair.answers, nfc(require_string(answer, "text", where + " qa " + id)));
        }
        pair.real_context = context;
        pair.title = title;
        pair.source = Source::kSquad;
        pairs.push_back(std::move(pair));
      }
    }
  }
  Corpus corpus(std::move(pairs), path.string());
  corpus.provenance().skipped = skipped;
  if (skipped > 0) {
    spdlog::info("{}: skipped {} unanswerable questions", path.string(), skipped);
  }
  return corpus;
}

Corpus ingest_jsonl(const std::filesystem::path& path, Source source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open " + path.string());
  }
  const std::string stem = path.stem().string();
  std::vector<QAPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    if (!record.is_object()) {
      throw Error(ErrorKind::kParse, where + ": not a JSON object");
    }

    QAPair pair;
    if (auto it = record.find("id"); it != record.end()) {
      pair.id = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
      pair.id = stem + ":" + std::to_string(line_no);
    }
    pair.question = nfc(require_string(record, "question", where));
    if (auto it = record.find("answers"); it != record.end()) {
      if (!it->is_array()) {
        throw Error(ErrorKind::kParse, where + ": field answers is not an array");
      }
      for (const json& answer : *it) {
        if (!answer.is_string()) {
          throw Error(ErrorKind::kParse, where + ": answers entries must be strings");
        }
        add_distinct(pair.answers, nfc(answer.get<std::string>()));
      }
    } else if (record.contains("answer")) {
      pair.answers.push_back(nfc(require_string(record, "answer", where)));
    } else {
      throw Error(ErrorKind::kParse, where + ": missing field answer");
    }
    if (auto it = record.find("context"); it != record.end() && !it->is_null()) {
      pair.real_context = nfc(require_string(record, "context", where));
    }
    if (auto it = record.find("title"); it != record.end() && !it->is_null()) {
      pair.title = nfc(require_string(record, "title", where));
    }
    pair.source = record.contains("source")
                      ? source_from_string(require_string(record, "source", where))
                      : source;
    try {
      // Validate per line so errors carry the line number.
      Corpus single({pair});
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
    pairs.push_back(std::move(pair));
  }

  Corpus corpus(std::move(pairs), path.string());
  if (corpus.empty()) {
    std::string warning = path.string() + ": no records";
    spdlog::warn("{}", warning);
    corpus.provenance().warnings.push_back(std::move(warning));
  }
  return corpus;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& pair : corpus) {
    out += to_json_line(pair);
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::kArgument,
                "test fraction must lie in (0,1), got " + std::to_string(fraction));
  }
}

// Indices of the first k entries of the seeded permutation, in input order.
std::vector<bool> choose(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> order = seeded_permutation(n, seed);
  std::vector<bool> chosen(n, false);
  for (std::size_t i = 0; i < k; ++i) chosen[order[i]] = true;
  return chosen;
}

}  // namespace

Split split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  check_fraction(test_fraction);
  if (corpus.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "cannot split an empty corpus");
  }
  const std::size_t n = corpus.size();
  const std::size_t test_size = std::min(n, round_half_up(test_fraction * static_cast<double>(n)));
  std::vector<bool> in_test = choose(n, test_size, seed);
  std::vector<QAPair> train;
  std::vector<QAPair> test;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).push_back(corpus.pairs()[i]);
  }
  const std::string& origin = corpus.provenance().source_path;
  return Split{Corpus(std::move(train), origin), Corpus(std::move(test), origin)};
}

Corpus sample_subset(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw Error(ErrorKind::kArgument, "sample size must be positive");
  }
  if (n > corpus.size()) {
    throw Error(ErrorKind::kArgument, "sample size " + std::to_string(n) +
                                          " exceeds corpus size " +
                                          std::to_string(corpus.size()));
  }
  std::vector<bool> chosen = choose(corpus.size(), n, seed);
  std::vector<QAPair> picked;
  picked.reserve(n);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (chosen[i]) picked.push_back(corpus.pairs()[i]);
  }
  return Corpus(std::move(picked), corpus.provenance().source_path);
}

}  // namespace qgsynth
