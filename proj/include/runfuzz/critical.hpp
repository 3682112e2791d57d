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

// Critical blocks: a covered target is its own critical block; an uncovered
// target's critical blocks are the covered blocks from which an all-uncovered
// path leads to it.

#ifndef RUNFUZZ_CRITICAL_HPP_
#define RUNFUZZ_CRITICAL_HPP_

#include <map>
#include <span>
#include <vector>

#include "runfuzz/coverage.hpp"
#include "runfuzz/icfg.hpp"

namespace runfuzz {

// `covered` is indexed by BlockId and must have icfg.block_count() bits.
// Result is sorted ascending.
std::vector<BlockId> compute_critical_blocks(TargetId target,
                                             const BlockBitmap& covered,
                                             const Icfg& icfg);

using CriticalMap = std::map<TargetId, std::vector<BlockId>>;

class CriticalState {
 public:
  CriticalState() = default;
  CriticalState(const Icfg& icfg, std::vector<TargetId> targets);

  const BlockBitmap& covered() const { return covered_; }
  const CriticalMap& per_target() const { return per_target_; }
  const std::vector<TargetId>& targets() const { return targets_; }
  // Union of every target's critical blocks, ascending.
  std::vector<BlockId> all_critical() const;

  // Adds blocks to the covered set, recomputes every target and reports
  // whether any target's critical set changed.
  bool refresh(std::span<const BlockId> new_blocks, const Icfg& icfg);

 private:
  std::vector<TargetId> targets_;
  BlockBitmap covered_;
  CriticalMap per_target_;
};

inline bool refresh_on_coverage(std::span<const BlockId> new_blocks,
                                CriticalState& state, const Icfg& icfg) {
  return state.refresh(new_blocks, icfg);
}

}  // namespace runfuzz

#endif  // RUNFUZZ_CRITICAL_HPP_
