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

#include "runfuzz/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "runfuzz/error.hpp"

namespace runfuzz {
namespace {

std::string six_digits(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string flags_string(std::uint8_t flags) {
  std::string s;
  if (flags & kFlagCov) s = "cov";
  if (flags & kFlagDiv) s += s.empty() ? "div" : "+div";
  return s;
}

std::string SeedEntry::file_name() const {
  std::string name = "id:" + six_digits(id);
  if (source) name += ",src:" + six_digits(*source);
  else if (!orig.empty()) name += ",orig:" + orig;
  return name + ",flags:" + flags_string(flags);
}

std::string CrashRecord::file_name() const {
  std::string name = "id:" + six_digits(id);
  if (source) name += ",src:" + six_digits(*source);
  else if (!orig.empty()) name += ",orig:" + orig;
  return name;
}

std::set<SeedId> cull_queue(const TopRatedArray& array,
                            std::span<const SeedEntry> corpus) {
  std::set<SeedId> favored;
  std::vector<char> done(array.size(), 0);
  const auto holders = array.holders();
  for (std::size_t i = 0; i < holders.size(); ++i) {
    if (done[i] || holders[i] == kNoSeed) continue;
    const SeedId s = holders[i];
    if (s >= corpus.size())
      throw ContractViolation("top-rated array names unknown seed " + std::to_string(s));
    favored.insert(s);
    const auto& trace = corpus[s].trace;
    for (std::size_t j = 0; j < trace.size() && j < done.size(); ++j)
      if (trace[j]) done[j] = 1;
  }
  return favored;
}

std::set<SeedId> select_favored(std::span<const TopRatedArray* const> arrays,
                                std::span<SeedEntry> corpus) {
  std::set<SeedId> favored;
  for (const auto* a : arrays) {
    auto part = cull_queue(*a, corpus);
    favored.insert(part.begin(), part.end());
  }
  for (auto& s : corpus) s.favored = favored.contains(s.id);
  return favored;
}

Campaign::Campaign(const SimProgram& program, CampaignConfig config,
                   CampaignSink* sink)
    : program_(&program),
      config_(config),
      sink_(sink),
      executor_(program, config.step_limit),
      mutator_(config.rng_seed, config.max_input_length),
      targets_(program.targets.target_blocks()),
      started_(std::chrono::steady_clock::now()) {
  if (program.subgraph.dense.size() != program.icfg.block_count())
    throw ContractViolation("program was not finalized");
  target_weights_ = map_target_weights(program.targets);
  distances_ = compute_distances(program.icfg, targets_);
  ClusterPolicy policy;
  policy.diversity = config.diversity;
  policy.merge = config.cluster;
  policy.support_threshold = config.support_threshold;
  policy.confidence_threshold = config.confidence_threshold;
  const std::size_t n = program.trace_size();
  clusters_ = TargetClusters(n, policy);
  critical_ = CriticalState(program.icfg, targets_);
  virgin_blocks_ = VirginBlocks(program.subgraph.size());
  crash_map_ = VirginMap(n);
  classified_ = ExecutionTrace(n);
  diversity_.assign(targets_.size(), std::vector<std::uint8_t>(n, 0));
  for (TargetId t : targets_) {
    indicator_[t] = 0.0;
    attributed_[t] = 0.0;
  }
}

ProcessOutcome Campaign::add_initial_seed(std::span<const std::uint8_t> bytes,
                                          const std::string& name) {
  return run_input(bytes, std::nullopt, name);
}

ProcessOutcome Campaign::process(std::span<const std::uint8_t> bytes,
                                 std::optional<SeedId> source) {
  return run_input(bytes, source, "");
}

ProcessOutcome Campaign::run_input(std::span<const std::uint8_t> bytes,
                                   std::optional<SeedId> source,
                                   const std::string& orig) {
  ProcessOutcome out;
  ++total_execs_;
  const ExecResult& r = executor_.run(bytes);
  if (r.hang) {
    ++hangs_;
    out.hang = true;
    return out;
  }
  if (r.crashed) {
    out.crashed = true;
    ++total_crashes_;
    std::copy(r.trace.bytes().begin(), r.trace.bytes().end(), classified_.bytes().begin());
    classified_.classify();
    MapRef ref{kPrimaryCluster, &crash_map_};
    if (has_new_bits(classified_, std::span<const MapRef>(&ref, 1)).store) {
      out.unique_crash = true;
      CrashRecord rec;
      rec.id = unique_crashes_++;
      rec.source = source;
      rec.orig = orig;
      rec.block = r.crash_block;
      rec.bytes.assign(bytes.begin(), bytes.end());
      if (sink_) sink_->on_crash(rec);
    }
    return out;
  }
  store(r, bytes, source, orig, out);
  return out;
}

bool Campaign::store(const ExecResult& r, std::span<const std::uint8_t> bytes,
                     std::optional<SeedId> source, const std::string& orig,
                     ProcessOutcome& out) {
  std::copy(r.trace.bytes().begin(), r.trace.bytes().end(), classified_.bytes().begin());
  classified_.classify();

  const auto& sub = program_->subgraph;
  std::vector<TargetId> hit;
  for (TargetId t : targets_)
    if (r.blocks.test(sub.dense_id(t))) hit.push_back(t);

  const auto selected = clusters_.prepare_execution(hit);
  const auto maps = clusters_.maps_for(selected);
  auto novelty = has_new_bits(classified_, maps);
  if (!novelty.store) return false;

  SeedEntry e;
  e.id = static_cast<SeedId>(corpus_.size());
  e.bytes.assign(bytes.begin(), bytes.end());
  e.trace.assign(classified_.bytes().begin(), classified_.bytes().end());
  e.covered_blocks = r.blocks;
  e.covered_targets = hit;
  e.exec_time = std::max<std::uint64_t>(1, r.steps);
  e.trace_bits = classified_.count_bits();
  e.source = source;
  e.orig = orig;
  for (const auto& g : novelty.data.groups) {
    for (ClusterId c : g) e.flags |= c == kPrimaryCluster ? kFlagCov : kFlagDiv;
  }

  clusters_.record_seed(novelty.data);

  std::vector<BlockId> fresh;
  for (auto d : virgin_blocks_.update(r.blocks)) fresh.push_back(sub.blocks[d]);

  corpus_.push_back(std::move(e));
  const SeedEntry& seed = corpus_.back();

  // Clusters may have merged while recording; update the surviving ones.
  std::vector<ClusterId> arrays;
  for (ClusterId c : selected) arrays.push_back(clusters_.resolve(c));
  std::sort(arrays.begin(), arrays.end());
  arrays.erase(std::unique(arrays.begin(), arrays.end()), arrays.end());
  auto metric_of = [this](SeedId s) { return corpus_[s].metric(); };
  for (ClusterId c : arrays) {
    if (clusters_.cluster(c).top_rated.challenge(seed.id, seed.metric(), seed.trace,
                                                 metric_of))
      favored_dirty_ = true;
  }

  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (!std::binary_search(hit.begin(), hit.end(), targets_[i])) continue;
    auto& u = diversity_[i];
    for (std::size_t j = 0; j < u.size(); ++j) u[j] |= seed.trace[j];
  }

  out.critical_changed = critical_.refresh(fresh, program_->icfg);
  out.stored = true;
  out.seed = seed.id;
  if (sink_) sink_->on_seed(seed);
  return true;
}

void Campaign::refresh_favored() {
  if (!favored_dirty_) return;
  std::vector<const TopRatedArray*> arrays;
  for (ClusterId c : clusters_.alive_clusters())
    arrays.push_back(&clusters_.cluster(c).top_rated);
  select_favored(arrays, corpus_);
  favored_dirty_ = false;
}

EnergyPlan Campaign::plan_energy() {
  EnergyPlan plan;
  const std::size_t n = corpus_.size();
  if (n == 0) return plan;
  refresh_favored();

  std::vector<SeedStats> stats(n);
  for (std::size_t i = 0; i < n; ++i)
    stats[i] = SeedStats{static_cast<double>(corpus_[i].exec_time),
                         static_cast<double>(corpus_[i].trace_bits)};
  const auto avg = corpus_averages(stats);
  std::vector<SeedInfo> infos(n);
  for (std::size_t i = 0; i < n; ++i) {
    corpus_[i].score = score_seed(stats[i], avg);
    infos[i] = SeedInfo{corpus_[i].score, corpus_[i].favored, &corpus_[i].covered_blocks};
  }

  const double budget = static_cast<double>(config_.execs_per_seed * n);
  const auto bm = build_block_matrix(critical_.per_target(), distances_, config_.k);
  const auto blocks = critical_.all_critical();
  const auto sm = build_seed_matrix(infos, blocks, program_->subgraph);
  auto sr = compute_seed_ratio(bm, sm, target_weights_, config_.exploration, infos);
  plan.shares.resize(n);
  plan.spread.assign(n, 1.0);
  if (!sr.fallback) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = sr.propagated[i] + sr.exploration[i];
      if (!(w > 0.0)) continue;
      for (const auto& [t, v] : sr.contributions[i]) plan.shares[i].emplace_back(t, v / w);
      plan.spread[i] = sr.exploration[i] / w;
    }
  }
  if (config_.afl_energy) {
    const auto w = afl_energy_weights(infos);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    plan.ratio.resize(n);
    plan.planned.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      plan.ratio[i] = sum > 0.0 ? w[i] / sum : 1.0 / static_cast<double>(n);
      plan.planned[i] = budget * plan.ratio[i];
    }
  } else {
    plan.ratio = std::move(sr.ratio);
    plan.fallback = sr.fallback;
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i)
      b[i] = static_cast<double>(corpus_[i].cumulative_energy);
    plan.planned = approach_ratio(budget, b, plan.ratio, config_.renormalize);
  }
  const double planned_total =
      std::accumulate(plan.planned.begin(), plan.planned.end(), 0.0);
  plan.allocated = round_allocation(
      plan.planned, static_cast<std::uint64_t>(std::llround(planned_total)));
  return plan;
}

void Campaign::account(const EnergyPlan& plan,
                       const std::vector<std::uint64_t>& executed) {
  double weight_sum = 0.0;
  for (const auto& [t, w] : target_weights_) weight_sum += w;
  double spread = 0.0;
  for (std::size_t i = 0; i < executed.size(); ++i) {
    if (executed[i] == 0) continue;
    const double e = static_cast<double>(executed[i]);
    for (TargetId t : corpus_[i].covered_targets) indicator_[t] += e;
    if (!(weight_sum > 0.0)) {
      unattributed_ += e;
      continue;
    }
    for (const auto& [t, share] : plan.shares[i]) attributed_[t] += e * share;
    spread += e * plan.spread[i];
  }
  if (spread > 0.0) {
    for (const auto& [t, w] : target_weights_) attributed_[t] += spread * w / weight_sum;
  }
}

bool Campaign::budget_exhausted() const {
  if (fuzz_execs_ >= config_.max_execs) return true;
  if (std::isfinite(config_.max_seconds)) {
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started_;
    if (elapsed.count() >= config_.max_seconds) return true;
  }
  return false;
}

CycleStats Campaign::run_cycle() {
  CycleStats empty;
  if (corpus_.empty()) return empty;
  ++cycle_;
  const EnergyPlan plan = plan_energy();
  const std::size_t n = plan.allocated.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.allocated[a] > plan.allocated[b];
  });

  std::vector<std::uint64_t> executed(n, 0);
  std::uint64_t execs = 0;
  bool aborted = false;
  bool budget_stop = false;
  for (std::size_t idx : order) {
    for (std::uint64_t j = 0; j < plan.allocated[idx]; ++j) {
      if (budget_exhausted()) {
        budget_stop = true;
        break;
      }
      // corpus_ may grow while fuzzing, so copy the input first.
      const auto stage = corpus_[idx].cumulative_energy;
      auto input = mutator_.mutate(corpus_[idx].bytes, stage);
      ++corpus_[idx].cumulative_energy;
      ++executed[idx];
      ++execs;
      ++fuzz_execs_;
      const auto out = process(input, corpus_[idx].id);
      if (out.critical_changed) {
        aborted = true;
        break;
      }
    }
    if (aborted || budget_stop) break;
  }

  account(plan, executed);
  CycleStats stats = snapshot(execs, aborted, budget_stop, plan, executed);
  if (sink_) sink_->on_cycle(stats);
  CycleStats light = stats;
  light.seeds.clear();
  history_.push_back(std::move(light));
  return stats;
}

std::uint64_t Campaign::run() {
  std::uint64_t ran = 0;
  while (!corpus_.empty() && cycle_ < config_.max_cycles && !budget_exhausted()) {
    run_cycle();
    ++ran;
  }
  return ran;
}

std::set<TargetId> Campaign::covered_targets() const {
  std::set<TargetId> out;
  const auto& sub = program_->subgraph;
  for (TargetId t : targets_)
    if (virgin_blocks_.covered().test(sub.dense_id(t))) out.insert(t);
  return out;
}

CycleStats Campaign::snapshot(std::uint64_t execs, bool aborted, bool budget_stop,
                              const EnergyPlan& plan,
                              const std::vector<std::uint64_t>& executed) const {
  CycleStats s;
  s.cycle = cycle_;
  s.aborted = aborted;
  s.budget_stop = budget_stop;
  s.execs = execs;
  s.total_execs = fuzz_execs_;
  s.corpus_size = corpus_.size();
  s.coverage_bits = clusters_.primary().virgin.count_covered_bits();
  s.clusters = clusters_.target_cluster_count();
  s.virgin_maps = clusters_.alive_clusters().size();
  s.unique_crashes = unique_crashes_;
  s.total_crashes = total_crashes_;
  s.hangs = hangs_;
  s.unattributed_energy = unattributed_;
  s.fallback_energy = plan.fallback;
  double total = 0.0;
  for (const auto& seed : corpus_) total += static_cast<double>(seed.cumulative_energy);
  s.energy_total = total;
  for (std::size_t i = 0; i < plan.allocated.size(); ++i) {
    const auto& seed = corpus_[i];
    s.seeds.push_back(SeedCycleStats{seed.id, plan.ratio[i], plan.planned[i],
                                     plan.allocated[i], executed[i],
                                     seed.cumulative_energy});
  }
  const auto covered = covered_targets();
  s.covered_targets = covered.size();
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const TargetId t = targets_[i];
    std::size_t bits = 0;
    for (auto b : diversity_[i]) bits += std::popcount(b);
    s.targets.push_back(TargetStats{t, covered.contains(t), indicator_.at(t),
                                    attributed_.at(t), bits});
  }
  return s;
}

}  // namespace runfuzz
