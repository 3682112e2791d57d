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

// Interprocedural control-flow graph, target resolution and the static
// block-to-target distance table.

#ifndef RUNFUZZ_ICFG_HPP_
#define RUNFUZZ_ICFG_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace runfuzz {

// Blocks are numbered by their position in name-sorted order, so layouts are
// reproducible no matter how the program document lists them.
using BlockId = std::uint32_t;
// Targets are target basic blocks; the id is the block's id.
using TargetId = BlockId;
using EdgeId = std::uint32_t;

inline constexpr BlockId kInvalidBlock = std::numeric_limits<BlockId>::max();

enum class EdgeKind : std::uint8_t { kControlFlow, kCall };

struct Edge {
  BlockId src = kInvalidBlock;
  BlockId dst = kInvalidBlock;
  EdgeKind kind = EdgeKind::kControlFlow;
};

// Immutable after construction; safe to share between campaigns.
class Icfg {
 public:
  struct NamedEdge {
    std::string src;
    std::string dst;
    EdgeKind kind = EdgeKind::kControlFlow;
  };

  Icfg() = default;

  // Builds the graph from names. Throws ParseError on duplicate blocks,
  // unknown edge endpoints or an unknown entry. Edge ids follow the order of
  // `edges`.
  static Icfg FromNames(std::vector<std::string> blocks,
                        const std::vector<NamedEdge>& edges,
                        std::string_view entry);

  std::size_t block_count() const { return names_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  BlockId entry() const { return entry_; }

  const std::string& name(BlockId block) const { return names_.at(block); }
  std::optional<BlockId> find(std::string_view name) const;
  // Like find() but throws LookupError naming the block.
  BlockId at(std::string_view name) const;

  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const EdgeId> out_edges(BlockId block) const {
    return out_.at(block);
  }
  std::span<const EdgeId> in_edges(BlockId block) const {
    return in_.at(block);
  }
  // Number of outgoing control-flow edges (call edges excluded).
  std::size_t control_flow_out_degree(BlockId block) const {
    return cf_out_degree_.at(block);
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, BlockId> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
  std::vector<std::size_t> cf_out_degree_;
  BlockId entry_ = kInvalidBlock;
};

// User-facing target locations ("file.c:123") and the blocks holding them.
struct TargetLocation {
  std::string name;
  double weight = 1.0;
  std::vector<BlockId> blocks;
};

struct TargetSpec {
  std::vector<TargetLocation> locations;

  // Target blocks in ascending order, deduplicated.
  std::vector<TargetId> target_blocks() const;
  bool empty() const { return locations.empty(); }
};

// Shortest weighted distance from every block to every target. Unreachable
// pairs are absent.
class DistanceTable {
 public:
  DistanceTable() = default;
  DistanceTable(std::size_t block_count, std::vector<TargetId> targets);

  std::optional<double> get(BlockId block, TargetId target) const;
  void set(BlockId block, TargetId target, double distance);
  bool reachable(BlockId block, TargetId target) const {
    return get(block, target).has_value();
  }

  std::span<const TargetId> targets() const { return targets_; }
  std::size_t block_count() const { return block_count_; }
  bool empty() const { return targets_.empty(); }

 private:
  std::size_t column(TargetId target) const;

  std::size_t block_count_ = 0;
  std::vector<TargetId> targets_;
  std::unordered_map<TargetId, std::size_t> column_of_;
  // Column-major, +inf marks "absent".
  std::vector<double> dist_;
};

// Blocks that can reach at least one target, with the dense ids used by the
// covered-block bitmap.
struct ReachableSubgraph {
  static constexpr std::uint32_t kNotDense =
      std::numeric_limits<std::uint32_t>::max();

  std::vector<BlockId> blocks;        // ascending, index == dense id
  std::vector<std::uint32_t> dense;   // block id -> dense id or kNotDense

  std::size_t size() const { return blocks.size(); }
  bool contains(BlockId block) const {
    return block < dense.size() && dense[block] != kNotDense;
  }
  std::uint32_t dense_id(BlockId block) const { return dense.at(block); }
};

// log2 of the source's control-flow out-degree for control-flow edges, 0 for
// call edges.
double compute_edge_weight(BlockId src, EdgeKind kind, const Icfg& icfg);

// One Dijkstra pass per target over the transposed graph.
DistanceTable compute_distances(const Icfg& icfg,
                                std::span<const TargetId> targets);

ReachableSubgraph reachable_subgraph(const Icfg& icfg,
                                     std::span<const TargetId> targets);

// Spreads each location's weight evenly across the blocks containing it and
// sums per block. Throws LookupError naming a location with no block.
std::map<TargetId, double> map_target_weights(const TargetSpec& spec);

}  // namespace runfuzz

#endif  // RUNFUZZ_ICFG_HPP_
