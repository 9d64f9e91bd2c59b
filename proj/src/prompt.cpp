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

#include "qgsynth/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "qgsynth/error.hpp"
#include "qgsynth/metrics.hpp"
#include "qgsynth/text.hpp"
#include "qgsynth/triplet.hpp"

namespace qgsynth {

using nlohmann::json;

namespace {

constexpr std::string_view kZeroShotTemplate =
    "Your job is to write {style} that significantly expands the given question {q_i} and "
    "answer {a_i}.";

constexpr std::string_view kFewShotTemplate =
    "Your job is to write {style} on a specific topic. Your written paragraph should contains "
    "the answer to a question that asks about certain information related to the topic. The "
    "user will first provide the topic, question, and answer and some example paragraphs.";

constexpr std::string_view kQuestionTemplate =
    "Based on the context {c} and answer {a}, generate {style} question";

constexpr std::string_view kOsbioQuestionTemplate =
    "Based on the context below, generate an introductory college level biology question with "
    "{a} as the answer.\n\n{c}";

using Bindings = std::map<std::string, std::string>;

// Single left-to-right pass over the template; substituted values are never
// rescanned, so braces inside user text stay literal.
std::string render(std::string_view tmpl, const Bindings& bindings, Bindings& resolved) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const std::size_t close = tmpl.find('}', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::kArgument, "unterminated placeholder in template");
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(ErrorKind::kArgument, "unbound placeholder {" + name + "}");
    }
    out.append(it->second);
    resolved[name] = it->second;
    pos = close + 1;
  }
  return out;
}

void require_text(std::string_view value, const char* what) {
  if (trim(value).empty()) {
    throw Error(ErrorKind::kArgument, std::string(what) + " must be non-empty");
  }
}

std::string exemplar_block(const Exemplar& ex) {
  std::string block;
  if (ex.title) block += "title: " + *ex.title + "\n";
  block += "context: " + ex.context + "\n";
  block += "question: " + ex.question + "\n";
  block += "answer: " + ex.answer;
  return block;
}

std::string target_block(const QAPair& pair) {
  std::string block;
  if (pair.title) block += "title: " + *pair.title + "\n";
  block += "question: " + pair.question + "\n";
  block += "answer: " + pair.answers.front() + "\n";
  block += "context:";
  return block;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw Error(ErrorKind::kParse, "unknown message role '" + std::string(name) + "'");
}

std::string Prompt::text() const {
  std::vector<std::string> parts;
  parts.reserve(messages.size());
  for (const auto& m : messages) parts.push_back(m.text);
  return join(parts, "\n\n");
}

std::string Prompt::snapshot_hash() const {
  json encoded = json::array();
  for (const auto& m : messages) {
    encoded.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  return sha256_hex(encoded.dump());
}

std::string_view to_string(StyleName name) {
  switch (name) {
    case StyleName::kSquadWiki: return "squad_wiki";
    case StyleName::kOsbioScience: return "osbio_science";
    case StyleName::kCustom: return "custom";
  }
  return "custom";
}

StylePreset StylePreset::squad_wiki() {
  return {StyleName::kSquadWiki, "wikipedia-style paragraph", "wikipedia-style"};
}

StylePreset StylePreset::osbio_science() {
  return {StyleName::kOsbioScience,
          "an introductory college level scientific paragraph about biology",
          "introductory college level biology"};
}

PromptPreset builtin_preset(std::string_view name) {
  if (name == "squad_wiki") {
    Exemplar solar;
    solar.title = "Solar_energy";
    solar.context =
        "Solar power is the conversion of sunlight into electricity, either directly using "
        "photovoltaics (PV), or indirectly using concentrated solar power (CSP). CSP systems use "
        "lenses or mirrors and tracking systems to focus a large area of sunlight into a small "
        "beam. PV converts light into electric current using the photoelectric effect.";
    solar.question = "What method does the photovoltaics system use to turn light into electricity?";
    solar.answer = "photoelectric effect";
    return {StylePreset::squad_wiki(), {solar}};
  }
  if (name == "osbio_science") {
    return {StylePreset::osbio_science(), {}};
  }
  throw Error(ErrorKind::kArgument, "unknown style preset '" + std::string(name) + "'");
}

void validate_exemplar(const Exemplar& exemplar) {
  require_text(exemplar.context, "exemplar context");
  require_text(exemplar.question, "exemplar question");
  require_text(exemplar.answer, "exemplar answer");
  if (!contains_normalized(exemplar.context, exemplar.answer)) {
    throw Error(ErrorKind::kValidation,
                "exemplar answer '" + exemplar.answer + "' does not occur in its context");
  }
}

namespace {

Exemplar exemplar_from_json(const json& node) {
  Exemplar ex;
  if (node.contains("title") && node.at("title").is_string()) {
    ex.title = nfc(node.at("title").get<std::string>());
  }
  ex.context = nfc(node.at("context").get<std::string>());
  ex.question = nfc(node.at("question").get<std::string>());
  ex.answer = nfc(node.at("answer").get<std::string>());
  validate_exemplar(ex);
  return ex;
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": malformed JSON at byte " +
                                       std::to_string(e.byte));
  }
}

}  // namespace

PromptPreset load_preset(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  try {
    PromptPreset preset;
    const std::string name = doc.value("name", std::string("custom"));
    if (name == "squad_wiki" || name == "osbio_science") {
      preset.style = builtin_preset(name).style;
    } else {
      preset.style.name = StyleName::kCustom;
    }
    if (doc.contains("context_style")) {
      preset.style.context_style_text = nfc(doc.at("context_style").get<std::string>());
    }
    if (doc.contains("question_style")) {
      preset.style.question_style_text = nfc(doc.at("question_style").get<std::string>());
    }
    require_text(preset.style.context_style_text, "context_style");
    require_text(preset.style.question_style_text, "question_style");
    if (doc.contains("exemplars")) {
      for (const json& node : doc.at("exemplars")) {
        preset.exemplars.push_back(exemplar_from_json(node));
      }
    }
    return preset;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

PromptPreset resolve_preset(std::string_view name_or_path) {
  if (name_or_path == "squad_wiki" || name_or_path == "osbio_science") {
    return builtin_preset(name_or_path);
  }
  return load_preset(std::filesystem::path(name_or_path));
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  try {
    const json& list = doc.is_object() ? doc.at("exemplars") : doc;
    std::vector<Exemplar> out;
    for (const json& node : list) out.push_back(exemplar_from_json(node));
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::kZeroShot ? "zero_shot" : "few_shot";
}

std::string_view to_string(PromptLayout layout) {
  return layout == PromptLayout::kChat ? "chat" : "single_user";
}

PromptLayout layout_from_string(std::string_view name) {
  if (name == "chat") return PromptLayout::kChat;
  if (name == "single_user") return PromptLayout::kSingleUser;
  throw Error(ErrorKind::kArgument, "unknown prompt layout '" + std::string(name) + "'");
}

std::string with_indefinite_article(std::string_view phrase) {
  std::string lowered = to_lower(phrase);
  for (std::string_view article : {"a ", "an ", "the "}) {
    if (lowered.starts_with(article)) return std::string(phrase);
  }
  const char first = phrase.empty() ? 'x' : static_cast<char>(std::tolower(static_cast<unsigned char>(phrase.front())));
  const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
  return std::string(vowel ? "an " : "a ") + std::string(phrase);
}

Prompt build_context_prompt(const QAPair& pair, const StylePreset& style,
                            const std::vector<Exemplar>& exemplars, PromptMode mode,
                            PromptLayout layout) {
  require_text(pair.question, "question");
  if (pair.answers.empty()) {
    throw Error(ErrorKind::kArgument, "answer must be non-empty");
  }
  require_text(pair.answers.front(), "answer");
  if (mode == PromptMode::kFewShot && exemplars.empty()) {
    throw Error(ErrorKind::kArgument, "few-shot prompting requires at least one exemplar");
  }

  Prompt prompt;
  const std::string style_phrase = with_indefinite_article(style.context_style_text);
  std::string instruction;
  std::string user_text;
  if (mode == PromptMode::kZeroShot) {
    instruction = render(kZeroShotTemplate,
                         {{"style", style_phrase}, {"q_i", pair.question}, {"a_i", pair.answers.front()}},
                         prompt.resolved_placeholders);
    user_text = target_block(pair);
  } else {
    instruction = render(kFewShotTemplate, {{"style", style_phrase}}, prompt.resolved_placeholders);
    std::vector<std::string> blocks;
    for (const auto& ex : exemplars) blocks.push_back(exemplar_block(ex));
    blocks.push_back(target_block(pair));
    user_text = join(blocks, "\n\n");
  }

  if (layout == PromptLayout::kChat) {
    prompt.messages.push_back({Role::kSystem, std::move(instruction)});
    prompt.messages.push_back({Role::kUser, std::move(user_text)});
  } else if (mode == PromptMode::kZeroShot) {
    prompt.messages.push_back({Role::kUser, std::move(instruction)});
  } else {
    prompt.messages.push_back({Role::kUser, instruction + "\n\n" + user_text});
  }
  return prompt;
}

Prompt build_question_prompt(std::string_view context, std::string_view answer,
                             const StylePreset& style) {
  require_text(context, "context");
  require_text(answer, "answer");
  Prompt prompt;
  const Bindings bindings = {{"c", std::string(context)},
                             {"a", std::string(answer)},
                             {"style", with_indefinite_article(style.question_style_text)}};
  const std::string_view tmpl =
      style.name == StyleName::kOsbioScience ? kOsbioQuestionTemplate : kQuestionTemplate;
  prompt.messages.push_back({Role::kUser, render(tmpl, bindings, prompt.resolved_placeholders)});
  return prompt;
}

TrainingText render_training_input(const Triplet& triplet, const StylePreset& style) {
  require_text(triplet.context, "context");
  require_text(triplet.answer, "answer");
  require_text(triplet.question, "question");
  Bindings resolved;
  const Bindings bindings = {{"c", triplet.context},
                             {"a", triplet.answer},
                             {"style", with_indefinite_article(style.question_style_text)}};
  return {render(kQuestionTemplate, bindings, resolved), triplet.question};
}

}  // namespace qgsynth
