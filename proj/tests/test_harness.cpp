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

#include <random>

#include "doctest.h"
#include "runfuzz/error.hpp"
#include "runfuzz/harness.hpp"
#include "runfuzz/program.hpp"
#include "test_util.hpp"

using namespace runfuzz;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (int x : v) out.push_back(static_cast<std::uint8_t>(x));
  return out;
}

std::vector<std::string> executed_names(const SimProgram& p, const ExecResult& r) {
  std::vector<std::string> out;
  for (BlockId b : r.blocks_executed) out.push_back(p.icfg.name(b));
  return out;
}

}  // namespace

TEST_CASE("conditions read missing bytes as zero") {
  Condition c{3, GuardOp::kEq, 0};
  CHECK(c.holds(bytes({1})));
  CHECK_FALSE(c.holds(bytes({1, 1, 1, 1})));
  CHECK(Condition{0, GuardOp::kNe, 5}.holds(bytes({4})));
  CHECK(Condition{0, GuardOp::kLt, 5}.holds(bytes({4})));
  CHECK_FALSE(Condition{0, GuardOp::kGt, 5}.holds(bytes({5})));
  Condition r{0, GuardOp::kRange, 0, 2, 4};
  CHECK(r.holds(bytes({2})));
  CHECK(r.holds(bytes({4})));
  CHECK_FALSE(r.holds(bytes({5})));
}

TEST_CASE("straight-line program counts each edge once") {
  const auto p = load_program(test::fixture("straight.json"));
  const auto r = execute(p, {});
  CHECK(r.trace.count_edges() == 2);
  CHECK(r.trace.bytes()[0] == 1);
  CHECK(r.trace.bytes()[1] == 1);
  CHECK_FALSE(r.crashed);
  CHECK(r.steps == 3);
}

TEST_CASE("short input reaches the target; long input overflows") {
  const auto p = load_program(test::fixture("listing.json"));
  const auto shortr = execute(p, bytes({'A', 1, 2}));
  CHECK_FALSE(shortr.crashed);
  CHECK(executed_names(p, shortr) == std::vector<std::string>{"copy", "done", "parse"});
  std::vector<std::uint8_t> longer(40, 1);
  longer[0] = 'A';
  const auto longr = execute(p, longer);
  CHECK(longr.crashed);
  CHECK(p.icfg.name(longr.crash_block) == "overflow");
  CHECK_FALSE(execute(p, bytes({'B'})).crashed);
}

TEST_CASE("dereference crashes only after the allocation ran") {
  const auto p = load_program(test::fixture("pta.json"));
  // Reach compare_symbols via the ELF path: no allocation, no crash.
  std::vector<std::uint8_t> elf(16, 0);
  elf[8] = 0x40;
  elf[9] = 0x90;
  elf[10] = 0x20;
  auto r = execute(p, elf);
  CHECK_FALSE(r.crashed);
  const auto names = executed_names(p, r);
  CHECK(std::find(names.begin(), names.end(), "cs_deref") != names.end());
  CHECK(std::find(names.begin(), names.end(), "xmalloc") != names.end());
  // Same constraints behind the Mach-O magic.
  auto macho = elf;
  macho[0] = 'M';
  const int magic[] = {0xFE, 0xED, 0xFA, 0xCE, 0xCF};
  for (int i = 0; i < 5; ++i) macho[1 + i] = static_cast<std::uint8_t>(magic[i]);
  r = execute(p, macho);
  CHECK(r.crashed);
  CHECK(p.icfg.name(r.crash_block) == "cs_deref");
  // Mach-O allocation alone does not crash.
  macho[10] = 0;
  CHECK_FALSE(execute(p, macho).crashed);
}

TEST_CASE("calls return to the caller's successor") {
  const auto p = parse_program(R"({
    "blocks": ["main", "f", "f2", "after"], "entry": "main",
    "edges": [{"src": "main", "dst": "f", "kind": "call"},
              {"src": "main", "dst": "after"}, {"src": "f", "dst": "f2"}],
    "guards": {}, "targets": {"t.c:1": ["after"]}})");
  const auto r = execute(p, {});
  CHECK(executed_names(p, r) == std::vector<std::string>{"after", "f", "f2", "main"});
  CHECK(r.trace.count_edges() == 3);
  CHECK(r.blocks.count() == 2);  // main and after reach the target
}

TEST_CASE("step limit turns loops into hangs") {
  const auto p = parse_program(R"({
    "blocks": ["a", "b"], "entry": "a",
    "edges": [{"src": "a", "dst": "b"}, {"src": "b", "dst": "a"}],
    "guards": {}, "targets": {}})");
  const auto r = execute(p, {}, 50);
  CHECK(r.hang);
  CHECK(r.steps == 50);
  CHECK(r.trace.bytes()[0] == 25);
  CHECK_THROWS_AS(Executor(p, 0), ContractViolation);
}

TEST_CASE("executor reuse gives identical results") {
  const auto p = load_program(test::fixture("pta.json"));
  Executor ex(p);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> in(rng() % 20);
    for (auto& b : in) b = static_cast<std::uint8_t>(rng());
    const auto& a = ex.run(in);
    const auto fresh = execute(p, in);
    CHECK(std::equal(a.trace.bytes().begin(), a.trace.bytes().end(),
                     fresh.trace.bytes().begin()));
    CHECK(a.blocks == fresh.blocks);
    CHECK(a.blocks_executed == fresh.blocks_executed);
    CHECK(a.crashed == fresh.crashed);
  }
}

TEST_CASE("walking bit flips come first, most significant bit first") {
  const MutationEngine m(1);
  CHECK(m.mutate(bytes({0}), 0) == bytes({0x80}));
  CHECK(m.mutate(bytes({0}), 7) == bytes({0x01}));
  CHECK(m.mutate(bytes({0, 0}), 8) == bytes({0, 0x80}));
  CHECK(m.mutate(bytes({0, 0}), 16) == bytes({0xC0, 0}));
  CHECK(m.mutate(bytes({0, 0}), 16 + 15 + 2) == bytes({0x3C, 0}));
  CHECK(MutationEngine::deterministic_stages(2) == 16 + 15 + 13);
  CHECK(MutationEngine::deterministic_stages(0) == 0);
}

TEST_CASE("mutation is deterministic and bounded") {
  const MutationEngine a(42), b(42), c(43);
  const auto seed = bytes({1, 2, 3, 4});
  const auto stage = MutationEngine::deterministic_stages(seed.size()) + 5;
  CHECK(a.mutate(seed, stage) == b.mutate(seed, stage));
  int differ = 0;
  for (std::uint64_t s = stage; s < stage + 20; ++s) differ += a.mutate(seed, s) != c.mutate(seed, s);
  CHECK(differ > 0);
  const MutationEngine bounded(7, 4096);
  for (std::uint64_t s = 0; s < 100000; ++s) {
    const auto out = bounded.mutate(seed, s);
    REQUIRE(out.size() <= 4096);
  }
  const MutationEngine tiny(7, 6);
  for (std::uint64_t s = 0; s < 2000; ++s) REQUIRE(tiny.mutate(seed, s).size() <= 6);
  CHECK_FALSE(a.mutate({}, 0).empty());
}
