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
#include "oracles.hpp"
#include "runfuzz/coverage.hpp"
#include "runfuzz/error.hpp"
#include "runfuzz/top_rated.hpp"

using namespace runfuzz;

namespace {

ExecutionTrace classified_trace(std::size_t size,
                                std::initializer_list<std::pair<std::size_t, int>> hits) {
  ExecutionTrace t(size);
  for (auto [i, n] : hits)
    for (int k = 0; k < n; ++k) t.hit(i);
  t.classify();
  return t;
}

std::set<ClusterGroup> groups(std::initializer_list<ClusterGroup> g) { return g; }

}  // namespace

TEST_CASE("bucket classification") {
  CHECK(classify_count(0) == 0);
  CHECK(classify_count(1) == 1);
  CHECK(classify_count(2) == 2);
  CHECK(classify_count(3) == 4);
  CHECK(classify_count(5) == 8);
  CHECK(classify_count(255) == 128);
  for (unsigned c = 0; c < 256; ++c) CHECK(classify_count(c) == oracle::bucket(c));
  CHECK(bucket_index(0) == 0);
  CHECK(bucket_index(1) == 1);
  CHECK(bucket_index(8) == 4);
  const std::vector<std::uint8_t> raw{0, 1, 5, 200};
  CHECK(classify_counts(raw) == std::vector<std::uint8_t>{0, 1, 8, 128});
}

TEST_CASE("trace counters saturate and classify in place") {
  ExecutionTrace t(16);
  CHECK(t.size() == 16);
  CHECK(t.word_count() == 2);
  for (int i = 0; i < 300; ++i) t.hit(3);
  t.hit(9);
  CHECK(t.bytes()[3] == 255);
  CHECK(t.count_edges() == 2);
  t.classify();
  CHECK(t.bytes()[3] == 128);
  CHECK(t.bytes()[9] == 1);
  CHECK(t.count_bits() == 2);
  t.clear();
  CHECK(t.count_edges() == 0);
  CHECK(trace_size_for_edges(0) == 8);
  CHECK(trace_size_for_edges(9) == 16);
}

TEST_CASE("novelty against primary and one cluster map") {
  VirginMap primary(8), c1(8);
  std::vector<MapRef> maps{{kPrimaryCluster, &primary}, {1, &c1}};

  auto first = has_new_bits(classified_trace(8, {{2, 1}}), maps);
  CHECK(first.store);
  CHECK(first.data.groups == groups({{0, 1}}));

  auto again = has_new_bits(classified_trace(8, {{2, 1}}), maps);
  CHECK_FALSE(again.store);
  CHECK(again.data.empty());

  // Primary already saw bit 5 through another execution.
  std::vector<MapRef> only_primary{{kPrimaryCluster, &primary}};
  has_new_bits(classified_trace(8, {{5, 1}}), only_primary);
  auto div = has_new_bits(classified_trace(8, {{5, 1}}), maps);
  CHECK(div.store);
  CHECK(div.data.groups == groups({{1}}));
  CHECK(div.data.updated(1));
  CHECK_FALSE(div.data.updated(0));
}

TEST_CASE("map size mismatch is a contract violation") {
  VirginMap small(8);
  std::vector<MapRef> maps{{kPrimaryCluster, &small}};
  CHECK_THROWS_AS(has_new_bits(classified_trace(16, {{1, 1}}), maps), ContractViolation);
}

TEST_CASE("word-wise novelty equals the per-bit reference") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t size = 8 * (1 + rng() % 6);
    const std::size_t n_maps = 1 + rng() % 4;
    std::vector<VirginMap> maps;
    std::vector<oracle::BitMap> ref;
    for (std::size_t m = 0; m < n_maps; ++m) {
      maps.emplace_back(size);
      ref.push_back({static_cast<std::uint32_t>(m), std::vector<bool>(size * 8, true)});
    }
    std::vector<MapRef> refs;
    for (std::size_t m = 0; m < n_maps; ++m)
      refs.push_back({static_cast<ClusterId>(m), &maps[m]});
    for (int step = 0; step < 6; ++step) {
      ExecutionTrace t(size);
      for (std::size_t i = 0; i < size; ++i)
        if (rng() % 3 == 0) for (unsigned k = rng() % 40; k > 0; --k) t.hit(i);
      t.classify();
      std::vector<std::uint8_t> bytes(t.bytes().begin(), t.bytes().end());
      // Only a random subset of maps takes part in each execution.
      std::vector<MapRef> part;
      std::vector<oracle::BitMap*> ref_part;
      for (std::size_t m = 0; m < n_maps; ++m)
        if (m == 0 || rng() % 2) part.push_back(refs[m]);
      std::vector<oracle::BitMap> ref_sub;
      for (const auto& r : part) ref_sub.push_back(ref[r.cluster]);
      const auto got = has_new_bits(t, part);
      const auto want = oracle::has_new_bits(bytes, ref_sub);
      for (std::size_t k = 0; k < part.size(); ++k) ref[part[k].cluster] = ref_sub[k];
      CHECK(got.store == want.store);
      CHECK(got.data.groups == want.data);
      for (std::size_t m = 0; m < n_maps; ++m)
        for (std::size_t bit = 0; bit < size * 8; ++bit)
          REQUIRE(maps[m].virgin(bit) == ref[m].virgin[bit]);
    }
  }
}

TEST_CASE("merged virgin map is the union of coverage") {
  VirginMap a(8), b(8);
  std::vector<MapRef> ma{{0, &a}}, mb{{1, &b}};
  has_new_bits(classified_trace(8, {{0, 1}}), ma);
  has_new_bits(classified_trace(8, {{1, 1}}), mb);
  const auto m = VirginMap::merged(a, b);
  CHECK_FALSE(m.virgin(0));
  CHECK_FALSE(m.virgin(8));
  CHECK(m.virgin(1));
  CHECK(m.count_covered_bits() == 2);
  CHECK(a.count_covered_bits() == 1);
}

TEST_CASE("virgin blocks report first coverage only") {
  VirginBlocks vb(4);
  BlockBitmap e(4);
  e.set(1);
  CHECK(vb.update(e) == std::vector<std::uint32_t>{1});
  CHECK(vb.update(e).empty());
  e.set(2);
  CHECK(vb.update(e) == std::vector<std::uint32_t>{2});
  CHECK(vb.covered().count() == 2);
}

TEST_CASE("top-rated array keeps the cheapest holder") {
  TopRatedArray arr(4);
  std::map<SeedId, std::uint64_t> metric{{0, 100}, {1, 50}, {2, 50}};
  auto of = [&](SeedId s) { return metric.at(s); };
  const std::vector<std::uint8_t> t0{1, 1, 0, 1}, t1{1, 1, 0, 0}, t2{1, 0, 1, 0};
  CHECK(arr.challenge(0, 100, t0, of));
  CHECK(arr.holder(0) == 0u);
  CHECK(arr.holder(3) == 0u);
  CHECK_FALSE(arr.holder(2).has_value());
  CHECK(arr.challenge(1, 50, t1, of));
  CHECK(arr.holder(0) == 1u);
  CHECK(arr.holder(1) == 1u);
  CHECK(arr.holder(3) == 0u);
  // Equal metric: lower id keeps the position.
  CHECK(arr.challenge(2, 50, t2, of));
  CHECK(arr.holder(0) == 1u);
  CHECK(arr.holder(2) == 2u);
  CHECK_FALSE(arr.challenge(1, 50, t1, of));
}
