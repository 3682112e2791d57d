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

#include "runfuzz/critical.hpp"

#include <algorithm>
#include <string>

#include "runfuzz/error.hpp"

namespace runfuzz {

std::vector<BlockId> compute_critical_blocks(TargetId target,
                                             const BlockBitmap& covered,
                                             const Icfg& icfg) {
  if (covered.size() != icfg.block_count())
    throw ContractViolation("covered set has " + std::to_string(covered.size()) +
                            " bits, graph has " +
                            std::to_string(icfg.block_count()) + " blocks");
  if (target >= icfg.block_count()) return {};
  if (covered.test(target)) return {target};

  // Backward closure of the target through uncovered blocks; covered blocks
  // met on the way form the boundary.
  std::vector<char> in_closure(icfg.block_count(), 0);
  std::vector<char> boundary(icfg.block_count(), 0);
  std::vector<BlockId> stack{target};
  in_closure[target] = 1;
  while (!stack.empty()) {
    const BlockId u = stack.back();
    stack.pop_back();
    for (EdgeId e : icfg.in_edges(u)) {
      const BlockId v = icfg.edge(e).src;
      if (covered.test(v)) {
        boundary[v] = 1;
      } else if (!in_closure[v]) {
        in_closure[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::vector<BlockId> out;
  for (BlockId b = 0; b < icfg.block_count(); ++b)
    if (boundary[b]) out.push_back(b);
  return out;
}

CriticalState::CriticalState(const Icfg& icfg, std::vector<TargetId> targets)
    : targets_(std::move(targets)), covered_(icfg.block_count()) {
  std::sort(targets_.begin(), targets_.end());
  targets_.erase(std::unique(targets_.begin(), targets_.end()), targets_.end());
  for (TargetId t : targets_) per_target_[t] = {};
}

std::vector<BlockId> CriticalState::all_critical() const {
  std::vector<BlockId> out;
  for (const auto& [t, blocks] : per_target_)
    out.insert(out.end(), blocks.begin(), blocks.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool CriticalState::refresh(std::span<const BlockId> new_blocks,
                            const Icfg& icfg) {
  bool grew = false;
  for (BlockId b : new_blocks) {
    if (b >= covered_.size())
      throw ContractViolation("block " + std::to_string(b) + " is out of range");
    if (!covered_.test(b)) {
      covered_.set(b);
      grew = true;
    }
  }
  if (!grew) return false;
  bool changed = false;
  for (auto& [t, blocks] : per_target_) {
    auto fresh = compute_critical_blocks(t, covered_, icfg);
    if (fresh != blocks) {
      blocks = std::move(fresh);
      changed = true;
    }
  }
  return changed;
}

}  // namespace runfuzz
