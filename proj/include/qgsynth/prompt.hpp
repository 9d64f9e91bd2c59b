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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgsynth/corpus.hpp"

namespace qgsynth {

struct Triplet;

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

struct Message {
  Role role = Role::kUser;
  std::string text;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Prompt {
  std::vector<Message> messages;
  // Placeholder name -> text substituted for it.
  std::map<std::string, std::string> resolved_placeholders;

  // All message texts joined by blank lines; convenient for inspection.
  std::string text() const;
  // SHA-256 of the canonical JSON encoding of `messages`.
  std::string snapshot_hash() const;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

enum class StyleName { kSquadWiki, kOsbioScience, kCustom };

std::string_view to_string(StyleName name);

struct StylePreset {
  StyleName name = StyleName::kCustom;
  std::string context_style_text;
  std::string question_style_text;

  static StylePreset squad_wiki();
  static StylePreset osbio_science();
};

struct Exemplar {
  std::optional<std::string> title;
  std::string context;
  std::string question;
  std::string answer;
};

// A style plus its pre-selected few-shot exemplars.
struct PromptPreset {
  StylePreset style;
  std::vector<Exemplar> exemplars;
};

// Built-in presets: "squad_wiki" (with the Solar_energy exemplar) and
// "osbio_science".
PromptPreset builtin_preset(std::string_view name);

// JSON: {"name", "context_style", "question_style", "exemplars": [{title?,
// context, question, answer}]}. Every exemplar context must contain its
// answer after SQuAD normalization.
PromptPreset load_preset(const std::filesystem::path& path);

// Built-in name, or else a preset file path.
PromptPreset resolve_preset(std::string_view name_or_path);

// A JSON array of exemplars (same record layout as in preset files).
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);

void validate_exemplar(const Exemplar& exemplar);

enum class PromptMode { kZeroShot, kFewShot };

std::string_view to_string(PromptMode mode);

enum class PromptLayout {
  // Instruction as a system message, exemplars and target pair as a user
  // message.
  kChat,
  // Everything in a single user message, for completion-style endpoints.
  kSingleUser,
};

std::string_view to_string(PromptLayout layout);
PromptLayout layout_from_string(std::string_view name);

Prompt build_context_prompt(const QAPair& pair, const StylePreset& style,
                            const std::vector<Exemplar>& exemplars, PromptMode mode,
                            PromptLayout layout = PromptLayout::kChat);

Prompt build_question_prompt(std::string_view context, std::string_view answer,
                             const StylePreset& style);

struct TrainingText {
  std::string input_text;
  std::string target_text;
};

// The question-generation training serialization: the context/answer input
// template and the gold question as target.
TrainingText render_training_input(const Triplet& triplet, const StylePreset& style);

// "a"/"an" prefix unless the phrase already starts with an article.
std::string with_indefinite_article(std::string_view phrase);

}  // namespace qgsynth
