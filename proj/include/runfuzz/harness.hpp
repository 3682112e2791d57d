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

// Simulated program under test and the mutation engine.
//
// A program is an ICFG whose branching blocks carry guards over input bytes.
// Execution starts at the entry block. In each block the guard (or the sole
// control-flow successor) picks the next block; a call edge out of the block
// is taken first, with the picked successor pushed as the return point. A
// block with nowhere to go returns to the innermost return point, or ends
// the run when the call stack is empty.

#ifndef RUNFUZZ_HARNESS_HPP_
#define RUNFUZZ_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "runfuzz/coverage.hpp"
#include "runfuzz/icfg.hpp"

namespace runfuzz {

enum class GuardOp : std::uint8_t { kEq, kNe, kLt, kGt, kRange };

struct Condition {
  std::uint32_t offset = 0;
  GuardOp op = GuardOp::kEq;
  std::uint8_t value = 0;
  std::uint8_t lo = 0;  // kRange bounds, inclusive
  std::uint8_t hi = 0;

  // Bytes past the end of the input read as 0.
  bool holds(std::span<const std::uint8_t> input) const;
};

struct GuardCase {
  Condition condition;
  EdgeId edge = 0;
};

// First matching case wins; otherwise `fallback` is taken.
struct Guard {
  std::vector<GuardCase> cases;
  EdgeId fallback = 0;
};

struct CrashRule {
  BlockId block = kInvalidBlock;
  std::optional<BlockId> requires_prior;
};

struct SimProgram {
  Icfg icfg;
  std::vector<std::optional<Guard>> guards;        // per block
  std::vector<std::optional<EdgeId>> call_edge;    // per block
  std::vector<std::optional<EdgeId>> sole_successor;  // unguarded blocks
  std::vector<CrashRule> crash_rules;
  TargetSpec targets;
  // Extra source-location table consulted when resolving a targets file.
  std::vector<TargetLocation> locations;
  std::vector<std::vector<std::uint8_t>> seeds;
  ReachableSubgraph subgraph;
  // Non-fatal load diagnostics, e.g. target locations without blocks.
  std::vector<std::string> warnings;

  // Replaces the target set and recomputes the reachable subgraph.
  void set_targets(TargetSpec spec);
  // Derives per-block successor tables from `icfg` and `guards`. Throws
  // ParseError naming the block when a branching block has no guard.
  void finalize();

  std::size_t trace_size() const { return trace_size_for_edges(icfg.edge_count()); }
};

struct ExecResult {
  ExecutionTrace trace;    // raw counters (not classified)
  BlockBitmap blocks;      // dense ids of the reachable subgraph
  std::vector<BlockId> blocks_executed;  // full ids, ascending, deduplicated
  bool crashed = false;
  bool hang = false;
  BlockId crash_block = kInvalidBlock;
  std::uint64_t steps = 0;
};

inline constexpr std::uint64_t kDefaultStepLimit = 100000;

// Reusable interpreter with preallocated buffers.
class Executor {
 public:
  explicit Executor(const SimProgram& program,
                    std::uint64_t step_limit = kDefaultStepLimit);

  const ExecResult& run(std::span<const std::uint8_t> input);
  const SimProgram& program() const { return *program_; }

 private:
  const SimProgram* program_;
  std::uint64_t step_limit_;
  ExecResult result_;
  std::vector<char> seen_;
  std::vector<BlockId> stack_;
};

ExecResult execute(const SimProgram& program, std::span<const std::uint8_t> input,
                   std::uint64_t step_limit = kDefaultStepLimit);

inline constexpr std::size_t kDefaultMaxInputLength = 4096;

// Deterministic stages first (1-, 2- and 4-bit walking flips, MSB first),
// then havoc. The mutant depends only on (input bytes, rng seed, stage).
class MutationEngine {
 public:
  explicit MutationEngine(std::uint64_t rng_seed,
                          std::size_t max_length = kDefaultMaxInputLength);

  std::size_t max_length() const { return max_length_; }
  // Number of deterministic stages for an input of `length` bytes.
  static std::uint64_t deterministic_stages(std::size_t length);

  std::vector<std::uint8_t> mutate(std::span<const std::uint8_t> input,
                                   std::uint64_t stage) const;

 private:
  void havoc(std::vector<std::uint8_t>& buf, std::mt19937_64& rng) const;

  std::uint64_t rng_seed_;
  std::size_t max_length_;
};

}  // namespace runfuzz

#endif  // RUNFUZZ_HARNESS_HPP_
