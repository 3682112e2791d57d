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

#include <numeric>

#include "doctest.h"
#include "runfuzz/program.hpp"
#include "runfuzz/scheduler.hpp"
#include "test_util.hpp"

using namespace runfuzz;

namespace {

// e -(b0==1)-> t -> j, e -> n -> j, j -(b1==1)-> x | y. Target: t.
constexpr const char* kTiny = R"({
  "blocks": ["e", "t", "n", "j", "x", "y"], "entry": "e",
  "edges": [{"src": "e", "dst": "t"}, {"src": "e", "dst": "n"},
            {"src": "t", "dst": "j"}, {"src": "n", "dst": "j"},
            {"src": "j", "dst": "x"}, {"src": "j", "dst": "y"}],
  "guards": {"e": {"offset": 0, "op": "==", "value": 1, "then": "t", "else": "n"},
             "j": {"offset": 1, "op": "==", "value": 1, "then": "x", "else": "y"}},
  "targets": {"tiny.c:3": ["t"]}
})";

std::vector<std::uint8_t> in(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (int x : v) out.push_back(static_cast<std::uint8_t>(x));
  return out;
}

class Recorder : public CampaignSink {
 public:
  void on_seed(const SeedEntry& s) override { seeds.push_back(s.file_name()); }
  void on_crash(const CrashRecord& c) override { crashes.push_back(c.file_name()); }
  void on_cycle(const CycleStats& s) override { cycles.push_back(s); }
  std::vector<std::string> seeds, crashes;
  std::vector<CycleStats> cycles;
};

SeedEntry entry_with_trace(SeedId id, std::vector<std::uint8_t> trace) {
  SeedEntry e;
  e.id = id;
  e.trace = std::move(trace);
  return e;
}

double ledger_total(const Campaign& c) {
  double t = 0.0;
  for (const auto& s : c.corpus()) t += static_cast<double>(s.cumulative_energy);
  return t;
}

}  // namespace

TEST_CASE("seed flags follow which maps changed") {
  const auto p = parse_program(kTiny);
  Recorder rec;
  Campaign c(p, CampaignConfig{}, &rec);
  auto r = c.process(in({0, 0}), std::nullopt);
  CHECK(r.stored);
  CHECK(c.corpus().back().flags == kFlagCov);
  r = c.process(in({1, 0}), 0);
  CHECK(r.stored);
  CHECK(c.corpus().back().flags == (kFlagCov | kFlagDiv));
  CHECK(c.process(in({1, 0}), 0).stored == false);
  CHECK(c.corpus().size() == 2);
  r = c.process(in({0, 1}), 0);
  CHECK(c.corpus().back().flags == kFlagCov);
  r = c.process(in({1, 1}), 1);
  CHECK(r.stored);
  CHECK(c.corpus().back().flags == kFlagDiv);
  CHECK(rec.seeds.back() == "id:000003,src:000001,flags:div");
  CHECK(rec.seeds.front() == "id:000000,flags:cov");
}

TEST_CASE("single map mode never stores diversity-only seeds") {
  const auto p = parse_program(kTiny);
  CampaignConfig cfg;
  cfg.diversity = false;
  Campaign c(p, cfg);
  c.process(in({0, 0}), std::nullopt);
  c.process(in({1, 0}), 0);
  c.process(in({0, 1}), 0);
  CHECK_FALSE(c.process(in({1, 1}), 0).stored);
  CHECK(c.clusters().target_cluster_count() == 0);
}

TEST_CASE("a seed updates only the arrays of clusters it hits") {
  const auto p = parse_program(kTiny);
  Campaign c(p, CampaignConfig{});
  c.process(in({1, 0}), std::nullopt);
  const TargetId t = p.icfg.at("t");
  const auto& cl = c.clusters().cluster(c.clusters().get_cluster(t));
  const auto before = std::vector<SeedId>(cl.top_rated.holders().begin(),
                                          cl.top_rated.holders().end());
  c.process(in({0, 1}), 0);
  const auto& cl2 = c.clusters().cluster(c.clusters().get_cluster(t));
  CHECK(std::equal(before.begin(), before.end(), cl2.top_rated.holders().begin()));
  const auto& prim = c.clusters().primary().top_rated;
  const std::size_t jx = 4;  // edge j->x
  CHECK(prim.holder(jx) == 1u);
  CHECK_FALSE(cl2.top_rated.holder(jx).has_value());
}

TEST_CASE("culling scans positions in order") {
  std::vector<SeedEntry> corpus{entry_with_trace(0, {0, 1, 1, 0}),
                                entry_with_trace(1, {0, 0, 1, 1})};
  TopRatedArray arr(4);
  auto m = [](SeedId) { return std::uint64_t{10}; };
  arr.challenge(0, 10, corpus[0].trace, m);
  arr.challenge(1, 10, corpus[1].trace, m);
  CHECK(cull_queue(arr, corpus) == std::set<SeedId>{0, 1});

  std::vector<SeedEntry> one{entry_with_trace(0, {1, 1, 1, 1})};
  TopRatedArray all(4);
  all.challenge(0, 10, one[0].trace, m);
  CHECK(cull_queue(all, one) == std::set<SeedId>{0});
  CHECK(cull_queue(TopRatedArray(4), std::span<const SeedEntry>{}).empty());
}

TEST_CASE("favored set is the union over arrays") {
  std::vector<SeedEntry> corpus{entry_with_trace(0, {1, 1, 0, 0}),
                                entry_with_trace(1, {1, 0, 1, 0})};
  auto metric = [](SeedId s) { return std::uint64_t{s == 0 ? 1u : 5u}; };
  TopRatedArray primary(4), target(4);
  primary.challenge(0, 1, corpus[0].trace, metric);
  primary.challenge(1, 5, std::vector<std::uint8_t>{1, 0, 0, 0}, metric);
  // In primary seed 0 covers all it needs; seed 1 shows up only in `target`.
  target.challenge(1, 5, corpus[1].trace, metric);
  const TopRatedArray* only_primary[] = {&primary};
  CHECK(select_favored(only_primary, corpus) == std::set<SeedId>{0});
  CHECK_FALSE(corpus[1].favored);
  const TopRatedArray* both[] = {&primary, &target};
  CHECK(select_favored(both, corpus) == std::set<SeedId>{0, 1});
  CHECK(corpus[1].favored);
}

TEST_CASE("zero energy runs nothing") {
  const auto p = load_program(test::fixture("figure.json"));
  CampaignConfig cfg;
  cfg.execs_per_seed = 0;
  Campaign c(p, cfg);
  c.add_initial_seed(std::vector<std::uint8_t>(8, 0), "zero");
  const auto s = c.run_cycle();
  CHECK(s.execs == 0);
  CHECK(c.fuzz_execs() == 0);
  CHECK(c.corpus().size() == 1);
}

TEST_CASE("cycles abort on new critical blocks and otherwise spend the plan") {
  const auto p = load_program(test::fixture("figure.json"));
  CampaignConfig cfg;
  cfg.rng_seed = 4;
  cfg.execs_per_seed = 64;
  Campaign c(p, cfg);
  c.add_initial_seed(std::vector<std::uint8_t>(8, 0xff), "ff");
  bool saw_abort = false, saw_full = false;
  for (int i = 0; i < 40 && !(saw_abort && saw_full); ++i) {
    const auto s = c.run_cycle();
    std::uint64_t alloc = 0, executed = 0;
    for (const auto& e : s.seeds) {
      alloc += e.allocated;
      executed += e.executed;
    }
    CHECK(executed == s.execs);
    if (s.aborted) {
      saw_abort = true;
      CHECK(s.execs < alloc);
    } else {
      saw_full = true;
      CHECK(s.execs == alloc);
    }
  }
  CHECK(saw_abort);
  CHECK(saw_full);
  CHECK(c.covered_targets().size() == 2);
}

TEST_CASE("per-target energy adds up to the ledger") {
  const auto p = load_program(test::fixture("pta.json"));
  for (bool afl : {false, true}) {
    CampaignConfig cfg;
    cfg.rng_seed = 2;
    cfg.afl_energy = afl;
    cfg.max_cycles = 6;
    Campaign c(p, cfg);
    c.add_initial_seed(std::vector<std::uint8_t>(16, 0), "zero");
    c.run();
    double attributed = c.unattributed_energy();
    for (const auto& [t, v] : c.attributed_energy()) attributed += v;
    CHECK(attributed == doctest::Approx(ledger_total(c)).epsilon(1e-9));
    CHECK(c.unattributed_energy() == 0.0);
    CHECK(ledger_total(c) == static_cast<double>(c.fuzz_execs()));
  }
}

TEST_CASE("without targets all energy is unattributed") {
  auto p = load_program(test::fixture("pta.json"));
  p.set_targets({});
  CampaignConfig cfg;
  cfg.max_cycles = 2;
  Campaign c(p, cfg);
  c.add_initial_seed(std::vector<std::uint8_t>(16, 0), "zero");
  c.run();
  CHECK(c.unattributed_energy() == ledger_total(c));
  CHECK(c.clusters().target_cluster_count() == 0);
}

TEST_CASE("clustering disabled keeps one cluster per covered target") {
  const auto p = load_program(test::fixture("figure.json"));
  CampaignConfig cfg;
  cfg.cluster = false;
  cfg.support_threshold = 0.0;
  cfg.confidence_threshold = 0.0;
  cfg.max_cycles = 10;
  Recorder rec;
  Campaign c(p, cfg, &rec);
  c.add_initial_seed(std::vector<std::uint8_t>(8, 0), "zero");
  c.run();
  for (const auto& s : rec.cycles) CHECK(s.clusters == s.covered_targets);
  CHECK(c.clusters().target_cluster_count() == c.covered_targets().size());
}

TEST_CASE("crashes are archived once per new crash trace") {
  const auto p = load_program(test::fixture("listing.json"));
  Recorder rec;
  Campaign c(p, CampaignConfig{}, &rec);
  std::vector<std::uint8_t> longer(40, 1);
  longer[0] = 'A';
  auto r = c.process(longer, std::nullopt);
  CHECK(r.crashed);
  CHECK(r.unique_crash);
  r = c.process(longer, std::nullopt);
  CHECK(r.crashed);
  CHECK_FALSE(r.unique_crash);
  CHECK(c.unique_crashes() == 1);
  CHECK(c.total_crashes() == 2);
  CHECK(c.corpus().empty());
  REQUIRE(rec.crashes.size() == 1);
  CHECK(rec.crashes[0] == "id:000000");
}

TEST_CASE("diversity series never shrinks") {
  const auto p = load_program(test::fixture("pta.json"));
  CampaignConfig cfg;
  cfg.max_cycles = 8;
  Recorder rec;
  Campaign c(p, cfg, &rec);
  c.add_initial_seed(std::vector<std::uint8_t>(16, 0), "zero");
  c.run();
  REQUIRE(rec.cycles.size() >= 2);
  for (std::size_t i = 1; i < rec.cycles.size(); ++i)
    for (std::size_t t = 0; t < rec.cycles[i].targets.size(); ++t)
      CHECK(rec.cycles[i].targets[t].diversity_bits >= rec.cycles[i - 1].targets[t].diversity_bits);
}
