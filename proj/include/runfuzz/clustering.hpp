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

// Target clusters. Each cluster owns one virgin map and one top-rated array.
// Cluster 0 is the primary cluster (global coverage); every other cluster is
// created for a single newly covered target and may later absorb others
// when their maps keep changing at the same bits.

#ifndef RUNFUZZ_CLUSTERING_HPP_
#define RUNFUZZ_CLUSTERING_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "runfuzz/coverage.hpp"
#include "runfuzz/icfg.hpp"
#include "runfuzz/top_rated.hpp"

namespace runfuzz {

struct Cluster {
  ClusterId id = kPrimaryCluster;
  std::set<TargetId> targets;
  VirginMap virgin;
  TopRatedArray top_rated;
  bool alive = true;

  bool is_primary() const { return id == kPrimaryCluster; }
};

// Order-insensitive pair key, first <= second.
struct ClusterPair {
  ClusterId first;
  ClusterId second;

  ClusterPair(ClusterId a, ClusterId b)
      : first(a < b ? a : b), second(a < b ? b : a) {}
  friend auto operator<=>(const ClusterPair&, const ClusterPair&) = default;
};

// Support counts of 1- and 2-itemsets over the per-seed update database.
class SupportCounts {
 public:
  double single(ClusterId c) const;
  double pair(ClusterId a, ClusterId b) const;
  // sigma({from, to}) / sigma({from}); zero when `from` was never seen.
  double confidence(ClusterId from, ClusterId to) const;

  void add_single(ClusterId c, double amount) { singles_[c] += amount; }
  void add_pair(ClusterId a, ClusterId b, double amount) {
    pairs_[ClusterPair(a, b)] += amount;
  }
  void clear() {
    singles_.clear();
    pairs_.clear();
  }

  const std::map<ClusterId, double>& singles() const { return singles_; }
  const std::map<ClusterPair, double>& pairs() const { return pairs_; }

 private:
  std::map<ClusterId, double> singles_;
  std::map<ClusterPair, double> pairs_;
};

// Every group of one seed adds 1/|data| to each member and to each pair of
// members, so a seed contributes one unit of support in total.
void update_support_counts(const TraceUpdateData& data, SupportCounts& counts);

struct Merge {
  ClusterId from;
  ClusterId into;
  friend bool operator==(const Merge&, const Merge&) = default;
};

// Valid rules a => b (pair support above `support_threshold`, confidence at
// least `confidence_threshold`) turned into merges of a into b. The primary
// cluster is never a source. A source with several valid rules picks the
// highest confidence, then the lowest destination id. Chains are resolved so
// each merge names a cluster that is still alive when it is applied; merges
// are ordered by ascending source.
//
// When `only` is given, only pairs with at least one member in it are
// considered.
std::vector<Merge> try_merge_clusters(const SupportCounts& counts,
                                      double support_threshold,
                                      double confidence_threshold,
                                      const std::set<ClusterId>* only = nullptr);

struct ClusterPolicy {
  // Keep per-target virgin maps at all; false means a single primary map.
  bool diversity = true;
  // Merge clusters by association rules; false keeps one map per target.
  bool merge = true;
  double support_threshold = 500.0;
  double confidence_threshold = 1.0;
};

class TargetClusters {
 public:
  TargetClusters() = default;
  TargetClusters(std::size_t map_size, ClusterPolicy policy);

  const ClusterPolicy& policy() const { return policy_; }

  bool has_cluster(TargetId target) const;
  // Throws LookupError for a target that was never covered.
  ClusterId get_cluster(TargetId target) const;
  // New singleton cluster with an all-virgin map. Throws ContractViolation
  // if the target already has one.
  ClusterId create_cluster(TargetId target);

  // {primary} plus the cluster of every covered target; primary first, then
  // ascending. Targets without a cluster are skipped.
  std::vector<ClusterId> clusters_for_execution(
      std::span<const TargetId> covered_targets) const;
  // Same, but first creates clusters for targets seen for the first time.
  // Always just {primary} when diversity is off.
  std::vector<ClusterId> prepare_execution(std::span<const TargetId> covered_targets);

  std::vector<MapRef> maps_for(std::span<const ClusterId> clusters);

  // Adds one stored seed's update data to the database and support counts,
  // then merges while valid rules exist. Returns the merges applied.
  std::vector<Merge> record_seed(const TraceUpdateData& data);
  // Applies merges in order; exposed for tests.
  void apply_merges(std::span<const Merge> merges);

  Cluster& cluster(ClusterId id) { return clusters_.at(id); }
  const Cluster& cluster(ClusterId id) const { return clusters_.at(id); }
  Cluster& primary() { return clusters_.front(); }
  const Cluster& primary() const { return clusters_.front(); }

  // Alive clusters, primary included, ascending.
  std::vector<ClusterId> alive_clusters() const;
  // Alive clusters other than the primary one.
  std::size_t target_cluster_count() const;
  std::size_t total_clusters_created() const { return clusters_.size(); }

  const SupportCounts& support() const { return support_; }
  // Follows merges to the cluster currently holding `id`'s targets.
  ClusterId resolve(ClusterId id) const;

 private:
  void recount_support();

  ClusterPolicy policy_;
  std::size_t map_size_ = 0;
  std::vector<Cluster> clusters_;
  std::vector<ClusterId> merged_into_;
  std::unordered_map<TargetId, ClusterId> target_cluster_;
  SupportCounts support_;
  std::vector<TraceUpdateData> database_;
};

}  // namespace runfuzz

#endif  // RUNFUZZ_CLUSTERING_HPP_
