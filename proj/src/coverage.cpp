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

#include "runfuzz/coverage.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "runfuzz/error.hpp"

namespace runfuzz {
namespace {

constexpr std::array<std::uint8_t, 256> MakeBucketTable() {
  std::array<std::uint8_t, 256> t{};
  for (int c = 0; c < 256; ++c) {
    std::uint8_t v = 0;
    if (c == 0) v = 0;
    else if (c == 1) v = 1;
    else if (c == 2) v = 2;
    else if (c == 3) v = 4;
    else if (c <= 7) v = 8;
    else if (c <= 15) v = 16;
    else if (c <= 31) v = 32;
    else if (c <= 127) v = 64;
    else v = 128;
    t[c] = v;
  }
  return t;
}

constexpr auto kBuckets = MakeBucketTable();

}  // namespace

std::size_t trace_size_for_edges(std::size_t edge_count) {
  const std::size_t words = std::max<std::size_t>(1, (edge_count + 7) / 8);
  return words * 8;
}

std::uint8_t classify_count(std::uint8_t count) { return kBuckets[count]; }

int bucket_index(std::uint8_t classified) {
  return classified == 0 ? 0 : std::countr_zero(classified) + 1;
}

ExecutionTrace::ExecutionTrace(std::size_t size_bytes)
    : size_(size_bytes), words_((size_bytes + 7) / 8, 0) {}

void ExecutionTrace::clear() { std::fill(words_.begin(), words_.end(), 0); }

void ExecutionTrace::classify() {
  for (auto& w : words_) {
    if (w == 0) continue;
    auto* b = reinterpret_cast<std::uint8_t*>(&w);
    for (int i = 0; i < 8; ++i) b[i] = kBuckets[b[i]];
  }
}

std::size_t ExecutionTrace::count_bits() const {
  std::size_t n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::size_t ExecutionTrace::count_edges() const {
  std::size_t n = 0;
  for (auto b : bytes()) n += b != 0;
  return n;
}

std::vector<std::uint8_t> classify_counts(std::span<const std::uint8_t> raw) {
  std::vector<std::uint8_t> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(),
                 [](std::uint8_t c) { return kBuckets[c]; });
  return out;
}

VirginMap::VirginMap(std::size_t size_bytes)
    : size_(size_bytes), words_((size_bytes + 7) / 8, ~std::uint64_t{0}) {
  if (size_bytes % 8 != 0) {
    // Padding bytes past the logical end are never virgin.
    const std::size_t tail = size_bytes % 8;
    words_.back() = (std::uint64_t{1} << (tail * 8)) - 1;
  }
}

std::size_t VirginMap::count_virgin_bits() const {
  std::size_t n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

VirginMap VirginMap::merged(const VirginMap& a, const VirginMap& b) {
  if (a.size_ != b.size_)
    throw ContractViolation("merging virgin maps of different sizes");
  VirginMap out = a;
  for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] &= b.words_[i];
  return out;
}

bool TraceUpdateData::updated(ClusterId cluster) const {
  return std::any_of(groups.begin(), groups.end(), [&](const ClusterGroup& g) {
    return std::binary_search(g.begin(), g.end(), cluster);
  });
}

NoveltyResult has_new_bits(const ExecutionTrace& classified,
                           std::span<const MapRef> maps) {
  for (const auto& m : maps) {
    if (m.map == nullptr || m.map->size() != classified.size())
      throw ContractViolation("virgin map of cluster " +
                              std::to_string(m.cluster) + " has length " +
                              std::to_string(m.map ? m.map->size() : 0) +
                              ", trace has " +
                              std::to_string(classified.size()));
  }

  // Maps sorted by cluster id so groups come out sorted.
  std::vector<MapRef> ordered(maps.begin(), maps.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const MapRef& a, const MapRef& b) { return a.cluster < b.cluster; });

  NoveltyResult result;
  std::vector<std::uint64_t> hits(ordered.size());
  const auto trace = classified.words();
  ClusterGroup group;
  for (std::size_t w = 0; w < trace.size(); ++w) {
    const std::uint64_t t = trace[w];
    if (t == 0) continue;
    std::uint64_t any = 0;
    for (std::size_t m = 0; m < ordered.size(); ++m) {
      auto& word = ordered[m].map->words()[w];
      const std::uint64_t fresh = t & word;
      hits[m] = fresh;
      if (fresh) {
        word &= ~fresh;
        any |= fresh;
      }
    }
    // Split the word back into bit positions only where something changed.
    while (any) {
      const int bit = std::countr_zero(any);
      any &= any - 1;
      const std::uint64_t mask = std::uint64_t{1} << bit;
      group.clear();
      for (std::size_t m = 0; m < ordered.size(); ++m) {
        if (hits[m] & mask) group.push_back(ordered[m].cluster);
      }
      group.erase(std::unique(group.begin(), group.end()), group.end());
      result.data.groups.insert(group);
    }
  }
  result.store = !result.data.empty();
  return result;
}

std::vector<std::uint32_t> VirginBlocks::update(const BlockBitmap& execution) {
  if (execution.size() != covered_.size())
    throw ContractViolation("covered-block bitmap has " +
                            std::to_string(execution.size()) + " bits, expected " +
                            std::to_string(covered_.size()));
  BlockBitmap fresh = execution - covered_;
  std::vector<std::uint32_t> out;
  for (auto i = fresh.find_first(); i != BlockBitmap::npos; i = fresh.find_next(i))
    out.push_back(static_cast<std::uint32_t>(i));
  covered_ |= execution;
  return out;
}

}  // namespace runfuzz
