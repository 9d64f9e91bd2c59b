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

#include "qgsynth/error.hpp"
#include "qgsynth/triplet.hpp"
#include "support.hpp"

using namespace qgsynth;
using testing::make_triplet;

TEST_SUITE("triplet") {

TEST_CASE("kind invariants") {
  Triplet real = make_triplet("1", "q", "a", "ctx");
  validate_triplet(real);
  real.gen_meta = GenerationMeta{};
  CHECK_THROWS_AS(validate_triplet(real), Error);

  Triplet synth = make_triplet("2", "q", "a", "ctx", ContextKind::kSyntheticFew);
  validate_triplet(synth);
  synth.gen_meta.reset();
  CHECK_THROWS_AS(validate_triplet(synth), Error);

  CHECK_THROWS_AS(validate_triplet(make_triplet("3", "q", "a", "  ")), Error);
}

TEST_CASE("json line round trip") {
  Triplet t = make_triplet("x", "Why {q}?", "a\"b", "ctx\nline", ContextKind::kSyntheticZero);
  t.gen_meta->timestamp = "2026-01-01T00:00:00Z";
  t.gen_meta->prompt = {{Role::kSystem, "s"}, {Role::kUser, "u"}};
  t.gen_meta->temperature = 0.9;
  t.gen_meta->too_long_risk = true;
  CHECK(triplet_from_json_line(to_json_line(t)) == t);
  const Triplet stripped = triplet_from_json_line(to_json_line(t, false));
  CHECK(stripped.gen_meta->timestamp.empty());
}

TEST_CASE("read tolerates an interrupted final line only") {
  testing::TempDir dir;
  const std::string a = to_json_line(make_triplet("b", "q", "a", "c")) + "\n";
  const std::string b = to_json_line(make_triplet("a", "q", "a", "c")) + "\n";
  testing::spit(dir / "t.jsonl", a + b + R"({"pair_id":"c","quest)");
  const auto ts = read_triplets(dir / "t.jsonl");
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].pair_id == "a");

  testing::spit(dir / "u.jsonl", a + "{broken\n" + b);
  CHECK_THROWS_AS(read_triplets(dir / "u.jsonl"), Error);

  testing::spit(dir / "d.jsonl", a + a);
  CHECK_THROWS_AS(read_triplets(dir / "d.jsonl"), Error);
}

TEST_CASE("canonical hash ignores order and timestamps") {
  Triplet x = make_triplet("x", "q", "a", "c", ContextKind::kSyntheticZero);
  Triplet y = make_triplet("y", "q", "a", "d");
  Triplet x2 = x;
  x.gen_meta->timestamp = "t1";
  x2.gen_meta->timestamp = "t2";
  CHECK(canonical_hash({x, y}) == canonical_hash({y, x2}));
  Triplet y2 = y;
  y2.context = "changed";
  CHECK(canonical_hash({x, y}) != canonical_hash({x, y2}));

  testing::TempDir dir;
  write_triplets({y, x}, dir / "a.jsonl");
  CHECK(canonical_file_hash(dir / "a.jsonl") == canonical_hash({x2, y}));
}

}  // TEST_SUITE
