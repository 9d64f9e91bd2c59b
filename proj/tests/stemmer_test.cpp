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

#include <utility>

#include "qgsynth/stemmer.hpp"

TEST_SUITE("stemmer") {

TEST_CASE("reference vocabulary") {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
      {"caress", "caress"},     {"cats", "cat"},            {"feed", "feed"},
      {"agreed", "agre"},       {"plastered", "plaster"},   {"bled", "bled"},
      {"motoring", "motor"},    {"sing", "sing"},           {"conflated", "conflat"},
      {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},
      {"tanned", "tan"},        {"falling", "fall"},        {"hissing", "hiss"},
      {"fizzed", "fizz"},       {"failing", "fail"},        {"filing", "file"},
      {"happy", "happi"},       {"sky", "sky"},             {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},
      {"digitizer", "digit"},   {"operator", "oper"},       {"feudalism", "feudal"},
      {"decisiveness", "decis"}, {"hopefulness", "hope"},   {"callousness", "callous"},
      {"formaliti", "formal"},  {"sensitiviti", "sensit"},  {"sensibiliti", "sensibl"},
      {"triplicate", "triplic"}, {"formative", "form"},     {"formalize", "formal"},
      {"electriciti", "electr"}, {"electrical", "electr"},  {"hopeful", "hope"},
      {"goodness", "good"},     {"revival", "reviv"},       {"allowance", "allow"},
      {"inference", "infer"},   {"airliner", "airlin"},     {"adjustable", "adjust"},
      {"defensible", "defens"}, {"irritant", "irrit"},      {"replacement", "replac"},
      {"adjustment", "adjust"}, {"dependent", "depend"},    {"adoption", "adopt"},
      {"communism", "commun"},  {"activate", "activ"},      {"effective", "effect"},
      {"bowdlerize", "bowdler"}, {"probate", "probat"},     {"rate", "rate"},
      {"cease", "ceas"},        {"controll", "control"},    {"roll", "roll"},
      {"generalizations", "gener"}, {"oscillators", "oscil"},
      {"logi", "logi"},         {"analogi", "analog"},      {"possibly", "possibl"},
  };
  for (const auto& [word, stem] : cases) {
    CAPTURE(word);
    CHECK(qgsynth::porter_stem(word) == stem);
  }
}

TEST_CASE("short and non-alphabetic words are unchanged") {
  CHECK(qgsynth::porter_stem("is") == "is");
  CHECK(qgsynth::porter_stem("a") == "a");
  CHECK(qgsynth::porter_stem("") == "");
  CHECK(qgsynth::porter_stem("1990s") == "1990s");
  CHECK(qgsynth::porter_stem("caf\xC3\xA9s") == "caf\xC3\xA9s");
}

}  // TEST_SUITE
