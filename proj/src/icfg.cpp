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

#include "runfuzz/icfg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>
#include <utility>

#include "runfuzz/error.hpp"

namespace runfuzz {

Icfg Icfg::FromNames(std::vector<std::string> blocks,
                     const std::vector<NamedEdge>& edges,
                     std::string_view entry) {
  Icfg g;
  std::sort(blocks.begin(), blocks.end());
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (blocks[i] == blocks[i - 1])
      throw ParseError("blocks: duplicate block '" + blocks[i] + "'");
  }
  g.names_ = std::move(blocks);
  for (BlockId i = 0; i < g.names_.size(); ++i) g.index_.emplace(g.names_[i], i);

  const std::size_t n = g.names_.size();
  g.out_.resize(n);
  g.in_.resize(n);
  g.cf_out_degree_.assign(n, 0);
  g.edges_.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    auto src = g.find(e.src);
    auto dst = g.find(e.dst);
    if (!src)
      throw ParseError("edges[" + std::to_string(i) + "].src: unknown block '" +
                       e.src + "'");
    if (!dst)
      throw ParseError("edges[" + std::to_string(i) + "].dst: unknown block '" +
                       e.dst + "'");
    const auto id = static_cast<EdgeId>(g.edges_.size());
    g.edges_.push_back(Edge{*src, *dst, e.kind});
    g.out_[*src].push_back(id);
    g.in_[*dst].push_back(id);
    if (e.kind == EdgeKind::kControlFlow) ++g.cf_out_degree_[*src];
  }

  auto e = g.find(entry);
  if (!e) throw ParseError("entry: unknown block '" + std::string(entry) + "'");
  g.entry_ = *e;
  return g;
}

std::optional<BlockId> Icfg::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

BlockId Icfg::at(std::string_view name) const {
  auto b = find(name);
  if (!b) throw LookupError("unknown block '" + std::string(name) + "'");
  return *b;
}

std::vector<TargetId> TargetSpec::target_blocks() const {
  std::vector<TargetId> out;
  for (const auto& loc : locations)
    out.insert(out.end(), loc.blocks.begin(), loc.blocks.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DistanceTable::DistanceTable(std::size_t block_count,
                             std::vector<TargetId> targets)
    : block_count_(block_count), targets_(std::move(targets)) {
  for (std::size_t c = 0; c < targets_.size(); ++c)
    column_of_.emplace(targets_[c], c);
  dist_.assign(block_count_ * targets_.size(),
               std::numeric_limits<double>::infinity());
}

std::size_t DistanceTable::column(TargetId target) const {
  auto it = column_of_.find(target);
  if (it == column_of_.end())
    throw LookupError("target block " + std::to_string(target) +
                      " is not in the distance table");
  return it->second;
}

std::optional<double> DistanceTable::get(BlockId block,
                                         TargetId target) const {
  auto it = column_of_.find(target);
  if (it == column_of_.end() || block >= block_count_) return std::nullopt;
  double d = dist_[it->second * block_count_ + block];
  if (std::isinf(d)) return std::nullopt;
  return d;
}

void DistanceTable::set(BlockId block, TargetId target, double distance) {
  dist_.at(column(target) * block_count_ + block) = distance;
}

double compute_edge_weight(BlockId src, EdgeKind kind, const Icfg& icfg) {
  if (kind == EdgeKind::kCall) return 0.0;
  // A control-flow edge out of src implies a degree of at least one.
  const auto degree = std::max<std::size_t>(1, icfg.control_flow_out_degree(src));
  return std::log2(static_cast<double>(degree));
}

DistanceTable compute_distances(const Icfg& icfg,
                                std::span<const TargetId> targets) {
  std::vector<TargetId> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  DistanceTable table(icfg.block_count(), sorted);
  if (sorted.empty()) return table;

  // Weights only depend on the edge, so compute them once.
  std::vector<double> weight(icfg.edge_count());
  for (EdgeId e = 0; e < icfg.edge_count(); ++e) {
    const auto& edge = icfg.edge(e);
    weight[e] = compute_edge_weight(edge.src, edge.kind, icfg);
  }

  using Item = std::pair<double, BlockId>;
  std::vector<double> dist(icfg.block_count());
  for (TargetId t : sorted) {
    if (t >= icfg.block_count())
      throw LookupError("target block " + std::to_string(t) +
                        " is not part of the graph");
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[t] = 0.0;
    heap.emplace(0.0, t);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      // Walking in-edges is walking the transposed graph.
      for (EdgeId e : icfg.in_edges(v)) {
        const BlockId u = icfg.edge(e).src;
        const double nd = d + weight[e];
        if (nd < dist[u]) {
          dist[u] = nd;
          heap.emplace(nd, u);
        }
      }
    }
    for (BlockId b = 0; b < icfg.block_count(); ++b) {
      if (!std::isinf(dist[b])) table.set(b, t, dist[b]);
    }
  }
  return table;
}

ReachableSubgraph reachable_subgraph(const Icfg& icfg,
                                     std::span<const TargetId> targets) {
  std::vector<char> seen(icfg.block_count(), 0);
  std::deque<BlockId> work;
  for (TargetId t : targets) {
    if (t < icfg.block_count() && !seen[t]) {
      seen[t] = 1;
      work.push_back(t);
    }
  }
  while (!work.empty()) {
    BlockId v = work.front();
    work.pop_front();
    for (EdgeId e : icfg.in_edges(v)) {
      BlockId u = icfg.edge(e).src;
      if (!seen[u]) {
        seen[u] = 1;
        work.push_back(u);
      }
    }
  }
  ReachableSubgraph sub;
  sub.dense.assign(icfg.block_count(), ReachableSubgraph::kNotDense);
  for (BlockId b = 0; b < icfg.block_count(); ++b) {
    if (!seen[b]) continue;
    sub.dense[b] = static_cast<std::uint32_t>(sub.blocks.size());
    sub.blocks.push_back(b);
  }
  return sub;
}

std::map<TargetId, double> map_target_weights(const TargetSpec& spec) {
  std::map<TargetId, double> out;
  for (const auto& loc : spec.locations) {
    std::vector<BlockId> blocks = loc.blocks;
    std::sort(blocks.begin(), blocks.end());
    blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
    if (blocks.empty())
      throw LookupError("target location '" + loc.name +
                        "' is not contained in any block");
    const double share = 1.0 / static_cast<double>(blocks.size());
    for (BlockId b : blocks) out[b] += share * loc.weight;
  }
  return out;
}

}  // namespace runfuzz
