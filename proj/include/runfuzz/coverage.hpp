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

// Execution traces, virgin maps and the multi-map novelty check.
//
// A trace holds one byte per edge. Raw hit counters are bucketed into one of
// eight bits, and the bucketed trace is compared against any number of virgin
// maps sixty-four bits at a time. Every bit that is still virgin in a map is
// cleared there, and for every cleared bit position the set of maps that
// changed at that position is recorded; that record feeds target clustering.

#ifndef RUNFUZZ_COVERAGE_HPP_
#define RUNFUZZ_COVERAGE_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace runfuzz {

static_assert(std::endian::native == std::endian::little,
              "bit positions assume little-endian word layout");

using ClusterId = std::uint32_t;
inline constexpr ClusterId kPrimaryCluster = 0;

using BlockBitmap = boost::dynamic_bitset<std::uint64_t>;

// Trace length for a program with `edge_count` edges: rounded up to whole
// 64-bit words, never zero.
std::size_t trace_size_for_edges(std::size_t edge_count);

// Bucket bit for one counter: {1},{2},{3},{4-7},{8-15},{16-31},{32-127},
// {128-255}; zero stays zero.
std::uint8_t classify_count(std::uint8_t count);
// 1-based bucket number of a classified byte (0 for an empty byte).
int bucket_index(std::uint8_t classified);

// Per-execution scratch buffer, word aligned.
class ExecutionTrace {
 public:
  ExecutionTrace() = default;
  explicit ExecutionTrace(std::size_t size_bytes);

  std::size_t size() const { return size_; }
  std::size_t word_count() const { return words_.size(); }

  std::span<std::uint8_t> bytes() {
    return {reinterpret_cast<std::uint8_t*>(words_.data()), size_};
  }
  std::span<const std::uint8_t> bytes() const {
    return {reinterpret_cast<const std::uint8_t*>(words_.data()), size_};
  }
  std::span<const std::uint64_t> words() const { return words_; }

  void clear();
  // Saturating increment of one counter.
  void hit(std::size_t index) {
    auto& c = bytes()[index];
    if (c != 0xff) ++c;
  }
  // Replaces raw counters with bucket bits in place.
  void classify();
  // Number of set bits; only meaningful after classify().
  std::size_t count_bits() const;
  // Number of non-zero bytes (edges touched).
  std::size_t count_edges() const;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Returns a bucketed copy of raw counters.
std::vector<std::uint8_t> classify_counts(std::span<const std::uint8_t> raw);

// Bitmap of not-yet-covered bits. Starts all ones; bits only ever go from 1
// to 0 except when a merged map is built.
class VirginMap {
 public:
  VirginMap() = default;
  explicit VirginMap(std::size_t size_bytes);

  std::size_t size() const { return size_; }
  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }
  std::span<const std::uint8_t> bytes() const {
    return {reinterpret_cast<const std::uint8_t*>(words_.data()), size_};
  }

  bool virgin(std::size_t bit) const {
    return (words_[bit / 64] >> (bit % 64)) & 1u;
  }
  std::size_t count_virgin_bits() const;
  std::size_t count_covered_bits() const { return size_ * 8 - count_virgin_bits(); }

  // Map virgin only where both inputs are virgin, i.e. the union of coverage.
  static VirginMap merged(const VirginMap& a, const VirginMap& b);

  friend bool operator==(const VirginMap&, const VirginMap&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Sorted, duplicate-free set of clusters whose maps changed at one bit.
using ClusterGroup = std::vector<ClusterId>;

struct TraceUpdateData {
  std::set<ClusterGroup> groups;

  bool empty() const { return groups.empty(); }
  std::size_t size() const { return groups.size(); }
  bool updated(ClusterId cluster) const;
};

struct MapRef {
  ClusterId cluster;
  VirginMap* map;
};

struct NoveltyResult {
  bool store = false;
  TraceUpdateData data;
};

// Compares a classified trace against every map. Throws ContractViolation if
// any map length differs from the trace length.
NoveltyResult has_new_bits(const ExecutionTrace& classified,
                           std::span<const MapRef> maps);

// One bit per reachable block, set once some stored seed covered it.
class VirginBlocks {
 public:
  VirginBlocks() = default;
  explicit VirginBlocks(std::size_t block_count) : covered_(block_count) {}

  std::size_t size() const { return covered_.size(); }
  const BlockBitmap& covered() const { return covered_; }

  // Marks the blocks as covered and returns the dense ids seen for the first
  // time, ascending.
  std::vector<std::uint32_t> update(const BlockBitmap& execution);

 private:
  BlockBitmap covered_;
};

}  // namespace runfuzz

#endif  // RUNFUZZ_COVERAGE_HPP_
