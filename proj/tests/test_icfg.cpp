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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "runfuzz/error.hpp"
#include "runfuzz/icfg.hpp"
#include "runfuzz/program.hpp"
#include "test_util.hpp"

using namespace runfuzz;

namespace {

Icfg chain_graph() {
  // A has two successors, so A->B costs one bit; B->t is free.
  return Icfg::FromNames({"A", "B", "C", "t", "x"},
                         {{"A", "B"}, {"A", "C"}, {"B", "t"}, {"C", "x"}}, "A");
}

}  // namespace

TEST_CASE("blocks are numbered in name order") {
  const auto g = Icfg::FromNames({"z", "a", "m"}, {{"z", "a"}}, "z");
  CHECK(g.name(0) == "a");
  CHECK(g.name(2) == "z");
  CHECK(g.entry() == 2);
  CHECK(g.at("m") == 1);
  CHECK_FALSE(g.find("q").has_value());
  CHECK_THROWS_AS(g.at("q"), LookupError);
}

TEST_CASE("graph construction rejects bad names") {
  CHECK_THROWS_AS(Icfg::FromNames({"a", "a"}, {}, "a"), ParseError);
  CHECK_THROWS_AS(Icfg::FromNames({"a"}, {{"a", "b"}}, "a"), ParseError);
  CHECK_THROWS_AS(Icfg::FromNames({"a"}, {}, "b"), ParseError);
}

TEST_CASE("edge weights") {
  const auto g = Icfg::FromNames(
      {"a", "b", "c", "d", "f"},
      {{"a", "b"}, {"b", "c"}, {"b", "d"}, {"a", "f", EdgeKind::kCall}}, "a");
  CHECK(compute_edge_weight(g.at("a"), EdgeKind::kControlFlow, g) == 0.0);
  CHECK(compute_edge_weight(g.at("b"), EdgeKind::kControlFlow, g) == 1.0);
  CHECK(compute_edge_weight(g.at("a"), EdgeKind::kCall, g) == 0.0);
  CHECK(g.control_flow_out_degree(g.at("a")) == 1);
}

TEST_CASE("distances on a short chain") {
  const auto g = chain_graph();
  const TargetId t = g.at("t");
  const std::vector<TargetId> targets{t};
  const auto d = compute_distances(g, targets);
  CHECK(d.get(g.at("A"), t) == 1.0);
  CHECK(d.get(g.at("B"), t) == 0.0);
  CHECK(d.get(t, t) == 0.0);
  CHECK_FALSE(d.get(g.at("x"), t).has_value());
  CHECK_FALSE(d.reachable(g.at("C"), t));
}

TEST_CASE("distances match per-source shortest paths on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    auto rg = oracle::random_graph(rng, n, 3.0 / static_cast<double>(n), false);
    const auto g = Icfg::FromNames(rg.blocks, rg.edges, rg.blocks[0]);
    std::vector<TargetId> targets;
    for (int k = 0; k < 3; ++k) targets.push_back(static_cast<TargetId>(rng() % n));
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    const auto d = compute_distances(g, targets);
    for (BlockId b = 0; b < n; ++b) {
      const auto ref = oracle::shortest_from(g, b);
      for (TargetId t : targets) {
        const auto got = d.get(b, t);
        if (std::isinf(ref[t])) {
          CHECK_FALSE(got.has_value());
        } else {
          REQUIRE(got.has_value());
          CHECK(std::abs(*got - ref[t]) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("reachable subgraph of the figure graph") {
  const auto p = load_program(test::fixture("figure.json"));
  const auto targets = p.targets.target_blocks();
  const auto sub = reachable_subgraph(p.icfg, targets);
  std::vector<std::string> names;
  for (BlockId b : sub.blocks) names.push_back(p.icfg.name(b));
  CHECK(names == std::vector<std::string>{"1", "2", "A", "B", "C", "D", "F", "G", "K"});
  for (std::uint32_t i = 0; i < sub.size(); ++i) CHECK(sub.dense_id(sub.blocks[i]) == i);
  CHECK_FALSE(sub.contains(p.icfg.at("H")));
  CHECK_FALSE(sub.contains(p.icfg.at("L")));
}

TEST_CASE("reachable subgraph corner cases") {
  const auto g = chain_graph();
  CHECK(reachable_subgraph(g, std::vector<TargetId>{}).size() == 0);
  const std::vector<TargetId> entry{g.entry()};
  const auto sub = reachable_subgraph(g, entry);
  REQUIRE(sub.size() == 1);
  CHECK(sub.blocks[0] == g.entry());
}

TEST_CASE("target weights spread over blocks") {
  TargetSpec one{{TargetLocation{"a.c:1", 1.0, {3}}}};
  CHECK(map_target_weights(one) == std::map<TargetId, double>{{3, 1.0}});
  TargetSpec split{{TargetLocation{"a.c:1", 1.0, {3, 4}}}};
  CHECK(map_target_weights(split) == std::map<TargetId, double>{{3, 0.5}, {4, 0.5}});
  TargetSpec shared{{TargetLocation{"a.c:1", 1.0, {3}}, TargetLocation{"a.c:2", 1.0, {3}}}};
  CHECK(map_target_weights(shared) == std::map<TargetId, double>{{3, 2.0}});
  TargetSpec empty_loc{{TargetLocation{"a.c:9", 1.0, {}}}};
  CHECK_THROWS_AS(map_target_weights(empty_loc), LookupError);
  CHECK(split.target_blocks() == std::vector<TargetId>{3, 4});
}
