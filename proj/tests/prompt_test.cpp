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

#include <cstdlib>

#include "qgsynth/error.hpp"
#include "qgsynth/prompt.hpp"
#include "qgsynth/triplet.hpp"
#include "support.hpp"

using namespace qgsynth;

namespace {

QAPair pair(std::string q, std::string a, std::optional<std::string> title = {}) {
  return {"p1", std::move(q), {std::move(a)}, {}, std::move(title), Source::kGeneric};
}

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

std::string snapshot_text(const Prompt& p) {
  std::string out;
  for (const auto& m : p.messages) out += "[" + std::string(to_string(m.role)) + "]\n" + m.text + "\n";
  return out;
}

// Set QGSYNTH_UPDATE_SNAPSHOTS=1 to rewrite the golden files.
void check_snapshot(const std::string& name, const Prompt& p) {
  const auto path = testing::data_path("prompts") / (name + ".txt");
  const std::string text = snapshot_text(p);
  if (std::getenv("QGSYNTH_UPDATE_SNAPSHOTS")) {
    testing::spit(path, text);
    return;
  }
  CAPTURE(name);
  REQUIRE(std::filesystem::exists(path));
  CHECK(testing::slurp(path) == text);
}

void check_no_placeholders(const Prompt& p) {
  for (const auto& m : p.messages) {
    for (const char* token : {"{style}", "{q_i}", "{a_i}", "{a}", "{c}"}) {
      CHECK(m.text.find(token) == std::string::npos);
    }
  }
}

}  // namespace

TEST_SUITE("prompt") {

TEST_CASE("style presets carry the exact style strings") {
  CHECK(StylePreset::squad_wiki().context_style_text == "wikipedia-style paragraph");
  CHECK(StylePreset::osbio_science().context_style_text ==
        "an introductory college level scientific paragraph about biology");
  const PromptPreset squad = builtin_preset("squad_wiki");
  REQUIRE(squad.exemplars.size() == 1);
  CHECK(squad.exemplars[0].title == "Solar_energy");
  CHECK(squad.exemplars[0].answer == "photoelectric effect");
  CHECK_THROWS_AS(builtin_preset("nope"), Error);
}

TEST_CASE("zero-shot prompt substitutes style, question and answer") {
  const Prompt p = build_context_prompt(pair("Q?", "A"), StylePreset::osbio_science(), {},
                                        PromptMode::kZeroShot);
  REQUIRE(p.messages.size() == 2);
  CHECK(p.messages[0].role == Role::kSystem);
  CHECK(p.messages[0].text ==
        "Your job is to write an introductory college level scientific paragraph about biology "
        "that significantly expands the given question Q? and answer A.");
  CHECK(p.resolved_placeholders.at("q_i") == "Q?");
  CHECK(p.resolved_placeholders.at("a_i") == "A");
  check_no_placeholders(p);

  const Prompt wiki = build_context_prompt(pair("Q?", "A"), StylePreset::squad_wiki(), {},
                                           PromptMode::kZeroShot);
  CHECK(wiki.messages[0].text.rfind("Your job is to write a wikipedia-style paragraph that", 0) == 0);
}

TEST_CASE("few-shot prompt places exemplars before the target") {
  const PromptPreset preset = builtin_preset("squad_wiki");
  const QAPair target = pair("Who developed the movable-type printing system in Europe?",
                             "Johannes Gutenberg", "Printing_press");
  const Prompt p = build_context_prompt(target, preset.style, preset.exemplars,
                                        PromptMode::kFewShot);
  const std::string text = p.text();
  CHECK(text.find("Your job is to write a wikipedia-style paragraph on a specific topic.") == 0);
  CHECK(count(text, "photoelectric effect") >= 1);
  const auto block_start = text.find("title: Solar_energy");
  const auto block_end = text.find("answer: photoelectric effect");
  REQUIRE(block_start != std::string::npos);
  REQUIRE(block_end != std::string::npos);
  CHECK(count(text, "answer: photoelectric effect") == 1);
  for (auto pos = text.find("photoelectric effect"); pos != std::string::npos;
       pos = text.find("photoelectric effect", pos + 1)) {
    CHECK(pos > block_start);
    CHECK(pos <= block_end + std::string("answer: ").size());
  }
  CHECK(text.find(target.question) > block_end);
  CHECK(text.substr(text.size() - 8) == "context:");
  check_no_placeholders(p);
}

TEST_CASE("exemplar order follows the input list") {
  std::vector<Exemplar> ex{{"First", "alpha is here", "q1", "alpha"},
                           {"Second", "beta is here", "q2", "beta"}};
  const Prompt p = build_context_prompt(pair("Q?", "A"), StylePreset::squad_wiki(), ex,
                                        PromptMode::kFewShot);
  CHECK(p.text().find("title: First") < p.text().find("title: Second"));
}

TEST_CASE("braces in user text stay literal") {
  const Prompt p = build_context_prompt(pair("What is {q_i}?", "set {a}"),
                                        StylePreset::squad_wiki(), {}, PromptMode::kZeroShot);
  const std::string& instr = p.messages[0].text;
  CHECK(instr.find("question What is {q_i}? and answer set {a}.") != std::string::npos);
  CHECK(count(instr, "{") == 2);
}

TEST_CASE("argument errors") {
  CHECK_THROWS_AS(build_context_prompt(pair(" ", "A"), StylePreset::squad_wiki(), {},
                                       PromptMode::kZeroShot),
                  Error);
  CHECK_THROWS_AS(build_context_prompt(pair("Q", ""), StylePreset::squad_wiki(), {},
                                       PromptMode::kZeroShot),
                  Error);
  CHECK_THROWS_AS(build_context_prompt(pair("Q", "A"), StylePreset::squad_wiki(), {},
                                       PromptMode::kFewShot),
                  Error);
  CHECK_THROWS_AS(build_question_prompt("", "A", StylePreset::squad_wiki()), Error);
}

TEST_CASE("question prompts") {
  const Prompt p = build_question_prompt("CTX", "ANS", StylePreset::squad_wiki());
  REQUIRE(p.messages.size() == 1);
  CHECK(p.messages[0].text == "Based on the context CTX and answer ANS, generate a wikipedia-style question");
  CHECK(p == build_question_prompt("CTX", "ANS", StylePreset::squad_wiki()));
  const Prompt bio = build_question_prompt("CTX", "ANS", StylePreset::osbio_science());
  CHECK(bio.messages[0].text.find("introductory college level biology question") !=
        std::string::npos);
  CHECK(bio.messages[0].text.find("with ANS as the answer") != std::string::npos);
  check_no_placeholders(bio);
}

TEST_CASE("training input") {
  const Triplet t = testing::make_triplet("1", "Why X?", "A", "C.");
  const TrainingText tt = render_training_input(t, StylePreset::squad_wiki());
  CHECK(tt.target_text == "Why X?");
  CHECK(tt.input_text.find("wikipedia-style") != std::string::npos);
  CHECK(tt.input_text.find("Based on the context") == 0);

  Triplet other = t;
  other.answer = "B";
  const std::string a = tt.input_text;
  const std::string b = render_training_input(other, StylePreset::squad_wiki()).input_text;
  REQUIRE(a.size() == b.size());
  std::size_t diffs = 0;
  std::size_t where = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      ++diffs;
      where = i;
    }
  }
  CHECK(diffs == 1);
  CHECK(a.substr(where) .rfind("A, generate", 0) == 0);
}

TEST_CASE("indefinite article") {
  CHECK(with_indefinite_article("wikipedia-style paragraph") == "a wikipedia-style paragraph");
  CHECK(with_indefinite_article("introductory text") == "an introductory text");
  CHECK(with_indefinite_article("an essay") == "an essay");
}

TEST_CASE("exemplars must contain their answer") {
  CHECK_THROWS_AS(validate_exemplar({{}, "no answer here", "q", "missing"}), Error);
  validate_exemplar({{}, "The Photoelectric Effect.", "q", "photoelectric effect"});
}

TEST_CASE("presets load from files") {
  testing::TempDir dir;
  testing::spit(dir / "p.json", R"({"name":"custom","context_style":"news article",
    "question_style":"news","exemplars":[{"context":"Rain fell in Paris.","question":"Where?","answer":"Paris"}]})");
  const PromptPreset p = load_preset(dir / "p.json");
  CHECK(p.style.name == StyleName::kCustom);
  CHECK(p.exemplars.size() == 1);
  CHECK(resolve_preset((dir / "p.json").string()).style.context_style_text == "news article");
  testing::spit(dir / "bad.json", R"({"exemplars":[{"context":"x","question":"q","answer":"y"}]})");
  CHECK_THROWS_AS(load_preset(dir / "bad.json"), Error);
}

TEST_CASE("golden snapshots") {
  const QAPair target{"t1", "Where do the light-dependent reactions take place in plants?",
                      {"the thylakoid membranes of chloroplasts"}, {}, "Photosynthesis",
                      Source::kSquad};
  const auto exemplars = builtin_preset("squad_wiki").exemplars;
  for (const char* style : {"squad_wiki", "osbio_science"}) {
    const StylePreset s = builtin_preset(style).style;
    for (auto mode : {PromptMode::kZeroShot, PromptMode::kFewShot}) {
      for (auto layout : {PromptLayout::kChat, PromptLayout::kSingleUser}) {
        const std::string name = std::string(style) + "-" + std::string(to_string(mode)) + "-" +
                                 std::string(to_string(layout));
        check_snapshot(name, build_context_prompt(target, s, exemplars, mode, layout));
      }
    }
    check_snapshot(std::string(style) + "-question",
                   build_question_prompt("Photosynthesis converts light into chemical energy.",
                                         "chemical energy", s));
  }
}

}  // TEST_SUITE
