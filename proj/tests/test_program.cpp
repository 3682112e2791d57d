// Copyright 2026 The runfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "runfuzz/error.hpp"
#include "runfuzz/program.hpp"
#include "test_util.hpp"

using namespace runfuzz;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

constexpr const char* kSmall = R"({
  "blocks": ["a", "b", "c"], "entry": "a",
  "edges": [{"src": "a", "dst": "b"}, {"src": "a", "dst": "c"}],
  "guards": {"a": {"offset": 0, "op": "==", "value": "x", "then": "b", "else": "c"}},
  "targets": {"t.c:1": ["b"], "t.c:2": "c"},
  "target_weights": {"t.c:2": 3},
  "locations": {"other.c:5": ["c"]},
  "crash_rules": [{"block": "c", "requires": "a"}],
  "seeds": ["0aff"]
})";

}  // namespace

TEST_CASE("program documents parse") {
  const auto p = parse_program(kSmall);
  CHECK(p.icfg.block_count() == 3);
  REQUIRE(p.targets.locations.size() == 2);
  CHECK(p.targets.locations[1].weight == 3.0);
  REQUIRE(p.guards[p.icfg.at("a")].has_value());
  CHECK(p.guards[p.icfg.at("a")]->cases[0].condition.value == 'x');
  REQUIRE(p.crash_rules.size() == 1);
  CHECK(p.crash_rules[0].requires_prior == p.icfg.at("a"));
  CHECK(p.seeds == std::vector<std::vector<std::uint8_t>>{{0x0a, 0xff}});
  CHECK(p.locations.size() == 1);
  CHECK(p.subgraph.size() == 3);
}

TEST_CASE("parse errors name the line or field") {
  CHECK(error_of("{\n\"blocks\": [\n,]}").rfind("line 3", 0) == 0);
  CHECK(error_of(R"({"entry": "a"})").find("blocks") != std::string::npos);
  CHECK(error_of(R"({"blocks": ["a"], "entry": "a", "edges": [{"src": "a", "dst": "q"}]})")
            .find("edges[0].dst") != std::string::npos);
  CHECK(error_of(R"({"blocks": ["a","b","c"], "entry": "a",
                     "edges": [{"src": "a", "dst": "b"}, {"src": "a", "dst": "c"}]})")
            .find("'a'") != std::string::npos);
  CHECK(error_of(R"({"blocks": ["a","b","c"], "entry": "a",
                     "edges": [{"src": "a", "dst": "b"}, {"src": "a", "dst": "c"}],
                     "guards": {"a": {"offset": 0, "op": "~", "value": 1, "then": "b", "else": "c"}}})")
            .find("guards.a.op") != std::string::npos);
  CHECK(error_of(R"({"blocks": ["a"], "entry": "a", "seeds": ["abc"]})").find("seeds[0]") !=
        std::string::npos);
  CHECK(error_of(R"({"blocks": ["a"], "entry": "a", "edges": [{"src": "a", "dst": "a", "kind": "jmp"}]})")
            .find("edges[0].kind") != std::string::npos);
  CHECK_THROWS_AS(load_program("/nonexistent/x.json"), ParseError);
}

TEST_CASE("target locations without blocks are dropped with a warning") {
  const auto p = parse_program(R"({"blocks": ["a"], "entry": "a",
                                   "targets": {"t.c:1": [], "t.c:2": ["a"]}})");
  CHECK(p.targets.locations.size() == 1);
  REQUIRE(p.warnings.size() == 1);
  CHECK(p.warnings[0].find("t.c:1") != std::string::npos);
}

TEST_CASE("targets files") {
  const auto p = parse_program(kSmall);
  const auto r = parse_targets_file("# comment\nother.c:5 2.5\nt.c:1\nmissing.c:9\n\n", p);
  REQUIRE(r.spec.locations.size() == 2);
  CHECK(r.spec.locations[0].name == "other.c:5");
  CHECK(r.spec.locations[0].weight == 2.5);
  CHECK(r.spec.locations[0].blocks == std::vector<BlockId>{p.icfg.at("c")});
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("missing.c:9") != std::string::npos);
  CHECK_THROWS_AS(parse_targets_file("t.c:1 abc\n", p), ParseError);
  CHECK_THROWS_AS(parse_targets_file("t.c:1 1 2\n", p), ParseError);
}

TEST_CASE("shipped fixtures load") {
  for (const char* f : {"figure.json", "straight.json", "listing.json", "pta.json", "groups.json"}) {
    INFO(f);
    CHECK_NOTHROW(load_program(test::fixture(f)));
  }
  const auto p = load_program(test::fixture("pta.json"));
  const auto t = load_targets_file(test::fixture("pta_targets.txt"), p);
  CHECK(t.spec.locations.size() == 2);
  CHECK(t.warnings.empty());
  // The dereference site is a known location but not a default target.
  CHECK(parse_targets_file("objdump.c:28\n", p).spec.locations.size() == 1);
}
