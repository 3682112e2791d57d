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

#include "runfuzz/clustering.hpp"

#include <algorithm>
#include <string>

#include "runfuzz/error.hpp"

namespace runfuzz {
namespace {

constexpr double kConfidenceSlack = 1e-9;

}  // namespace

double SupportCounts::single(ClusterId c) const {
  auto it = singles_.find(c);
  return it == singles_.end() ? 0.0 : it->second;
}

double SupportCounts::pair(ClusterId a, ClusterId b) const {
  auto it = pairs_.find(ClusterPair(a, b));
  return it == pairs_.end() ? 0.0 : it->second;
}

double SupportCounts::confidence(ClusterId from, ClusterId to) const {
  const double s = single(from);
  if (s <= 0.0) return 0.0;
  return pair(from, to) / s;
}

void update_support_counts(const TraceUpdateData& data, SupportCounts& counts) {
  if (data.empty()) return;
  const double share = 1.0 / static_cast<double>(data.size());
  for (const auto& group : data.groups) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      counts.add_single(group[i], share);
      for (std::size_t j = i + 1; j < group.size(); ++j)
        counts.add_pair(group[i], group[j], share);
    }
  }
}

std::vector<Merge> try_merge_clusters(const SupportCounts& counts,
                                      double support_threshold,
                                      double confidence_threshold,
                                      const std::set<ClusterId>* only) {
  struct Best {
    ClusterId into;
    double confidence;
  };
  std::map<ClusterId, Best> best;
  auto offer = [&](ClusterId from, ClusterId to, double pair_count) {
    if (from == kPrimaryCluster) return;
    const double s = counts.single(from);
    if (s <= 0.0) return;
    const double conf = pair_count / s;
    if (conf < confidence_threshold - kConfidenceSlack) return;
    auto it = best.find(from);
    if (it == best.end()) {
      best.emplace(from, Best{to, conf});
    } else if (conf > it->second.confidence ||
               (conf == it->second.confidence && to < it->second.into)) {
      it->second = Best{to, conf};
    }
  };
  for (const auto& [key, count] : counts.pairs()) {
    if (key.first == key.second) continue;
    if (!(count > support_threshold)) continue;
    if (only && !only->contains(key.first) && !only->contains(key.second)) continue;
    offer(key.first, key.second, count);
    offer(key.second, key.first, count);
  }

  // Resolve chains: a source merged earlier in this plan is represented by
  // its destination from then on.
  std::map<ClusterId, ClusterId> retired;
  auto live = [&](ClusterId c) {
    for (auto it = retired.find(c); it != retired.end(); it = retired.find(c))
      c = it->second;
    return c;
  };
  std::vector<Merge> out;
  for (const auto& [from, choice] : best) {
    const ClusterId src = live(from);
    const ClusterId dst = live(choice.into);
    if (src != from || dst == src) continue;
    retired.emplace(src, dst);
    out.push_back(Merge{src, dst});
  }
  return out;
}

TargetClusters::TargetClusters(std::size_t map_size, ClusterPolicy policy)
    : policy_(policy), map_size_(map_size) {
  Cluster primary;
  primary.id = kPrimaryCluster;
  primary.virgin = VirginMap(map_size);
  primary.top_rated = TopRatedArray(map_size);
  clusters_.push_back(std::move(primary));
  merged_into_.push_back(kPrimaryCluster);
}

bool TargetClusters::has_cluster(TargetId target) const {
  return target_cluster_.contains(target);
}

ClusterId TargetClusters::get_cluster(TargetId target) const {
  auto it = target_cluster_.find(target);
  if (it == target_cluster_.end())
    throw LookupError("target block " + std::to_string(target) +
                      " has not been covered yet");
  return it->second;
}

ClusterId TargetClusters::create_cluster(TargetId target) {
  if (has_cluster(target))
    throw ContractViolation("target block " + std::to_string(target) +
                            " already has a cluster");
  Cluster c;
  c.id = static_cast<ClusterId>(clusters_.size());
  c.targets.insert(target);
  c.virgin = VirginMap(map_size_);
  c.top_rated = TopRatedArray(map_size_);
  target_cluster_.emplace(target, c.id);
  merged_into_.push_back(c.id);
  clusters_.push_back(std::move(c));
  return clusters_.back().id;
}

std::vector<ClusterId> TargetClusters::clusters_for_execution(
    std::span<const TargetId> covered_targets) const {
  std::vector<ClusterId> out;
  for (TargetId t : covered_targets) {
    auto it = target_cluster_.find(t);
    if (it != target_cluster_.end() && it->second != kPrimaryCluster)
      out.push_back(it->second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.insert(out.begin(), kPrimaryCluster);
  return out;
}

std::vector<ClusterId> TargetClusters::prepare_execution(
    std::span<const TargetId> covered_targets) {
  if (!policy_.diversity) return {kPrimaryCluster};
  for (TargetId t : covered_targets) {
    if (!has_cluster(t)) create_cluster(t);
  }
  return clusters_for_execution(covered_targets);
}

std::vector<MapRef> TargetClusters::maps_for(std::span<const ClusterId> clusters) {
  std::vector<MapRef> out;
  out.reserve(clusters.size());
  for (ClusterId c : clusters) out.push_back(MapRef{c, &clusters_.at(c).virgin});
  return out;
}

std::vector<Merge> TargetClusters::record_seed(const TraceUpdateData& data) {
  std::vector<Merge> applied;
  if (data.empty()) return applied;
  database_.push_back(data);
  update_support_counts(data, support_);
  if (!policy_.diversity || !policy_.merge) return applied;

  // Only rules involving a cluster this seed touched can have changed.
  std::set<ClusterId> touched;
  for (const auto& g : data.groups) touched.insert(g.begin(), g.end());
  auto plan = try_merge_clusters(support_, policy_.support_threshold,
                                 policy_.confidence_threshold, &touched);
  while (!plan.empty()) {
    apply_merges(plan);
    applied.insert(applied.end(), plan.begin(), plan.end());
    plan = try_merge_clusters(support_, policy_.support_threshold,
                              policy_.confidence_threshold);
  }
  return applied;
}

void TargetClusters::apply_merges(std::span<const Merge> merges) {
  if (merges.empty()) return;
  for (const auto& m : merges) {
    if (m.from == kPrimaryCluster)
      throw ContractViolation("the primary cluster cannot be merged away");
    Cluster& from = clusters_.at(m.from);
    Cluster& into = clusters_.at(m.into);
    if (!from.alive || !into.alive || m.from == m.into)
      throw ContractViolation("invalid merge of cluster " +
                              std::to_string(m.from) + " into " +
                              std::to_string(m.into));
    into.virgin = VirginMap::merged(into.virgin, from.virgin);
    for (TargetId t : from.targets) {
      into.targets.insert(t);
      target_cluster_[t] = into.id;
    }
    from.targets.clear();
    from.alive = false;
    from.virgin = VirginMap();
    from.top_rated = TopRatedArray();
    merged_into_[m.from] = m.into;
  }
  recount_support();
}

ClusterId TargetClusters::resolve(ClusterId id) const {
  while (merged_into_.at(id) != id) id = merged_into_[id];
  return id;
}

void TargetClusters::recount_support() {
  support_.clear();
  for (auto& data : database_) {
    TraceUpdateData remapped;
    for (const auto& g : data.groups) {
      ClusterGroup ng;
      ng.reserve(g.size());
      for (ClusterId c : g) ng.push_back(resolve(c));
      std::sort(ng.begin(), ng.end());
      ng.erase(std::unique(ng.begin(), ng.end()), ng.end());
      remapped.groups.insert(std::move(ng));
    }
    data = std::move(remapped);
    update_support_counts(data, support_);
  }
}

std::vector<ClusterId> TargetClusters::alive_clusters() const {
  std::vector<ClusterId> out;
  for (const auto& c : clusters_)
    if (c.alive) out.push_back(c.id);
  return out;
}

std::size_t TargetClusters::target_cluster_count() const {
  std::size_t n = 0;
  for (const auto& c : clusters_)
    if (c.alive && !c.is_primary()) ++n;
  return n;
}

}  // namespace runfuzz
