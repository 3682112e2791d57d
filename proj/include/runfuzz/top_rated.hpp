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

#ifndef RUNFUZZ_TOP_RATED_HPP_
#define RUNFUZZ_TOP_RATED_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace runfuzz {

using SeedId = std::uint32_t;
inline constexpr SeedId kNoSeed = std::numeric_limits<SeedId>::max();

// Best seed per trace position. A seed "covers" position i when its
// classified trace byte i is non-zero; the best holder minimizes
// exec_time * input length, ties going to the lower seed id.
class TopRatedArray {
 public:
  TopRatedArray() = default;
  explicit TopRatedArray(std::size_t size) : holder_(size, kNoSeed) {}

  std::size_t size() const { return holder_.size(); }
  std::optional<SeedId> holder(std::size_t index) const {
    if (holder_[index] == kNoSeed) return std::nullopt;
    return holder_[index];
  }
  std::span<const SeedId> holders() const { return holder_; }

  // Challenges every position the seed covers. `metric_of(id)` returns the
  // metric of the current holder. Returns true if any position changed hands.
  template <typename MetricOf>
  bool challenge(SeedId seed, std::uint64_t metric,
                 std::span<const std::uint8_t> trace, MetricOf&& metric_of) {
    bool changed = false;
    for (std::size_t i = 0; i < trace.size() && i < holder_.size(); ++i) {
      if (trace[i] == 0) continue;
      const SeedId cur = holder_[i];
      if (cur != kNoSeed) {
        const std::uint64_t cur_metric = metric_of(cur);
        if (cur_metric < metric || (cur_metric == metric && cur < seed)) continue;
        if (cur == seed) continue;
      }
      holder_[i] = seed;
      changed = true;
    }
    return changed;
  }

 private:
  std::vector<SeedId> holder_;
};

}  // namespace runfuzz

#endif  // RUNFUZZ_TOP_RATED_HPP_
