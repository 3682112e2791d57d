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

// Corpus-level energy assignment. Target weights flow to critical blocks
// (column-normalized B), then to the seeds covering those blocks
// (column-normalized S), giving a desired ratio r over seeds. Each cycle's
// budget is then split so that cumulative energy approaches r.
//
// Both matrices are stored sparsely as columns of (row, value) entries.

#ifndef RUNFUZZ_ENERGY_HPP_
#define RUNFUZZ_ENERGY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "runfuzz/coverage.hpp"
#include "runfuzz/critical.hpp"
#include "runfuzz/icfg.hpp"

namespace runfuzz {

// Columns keyed by target; rows are critical blocks. Every stored column
// sums to 1; targets with no critical block have no column.
struct BlockMatrix {
  std::map<TargetId, std::vector<std::pair<BlockId, double>>> columns;
};

BlockMatrix build_block_matrix(const CriticalMap& critical,
                               const DistanceTable& dist, double k);

struct SeedInfo {
  double score = 100.0;
  bool favored = false;
  // Covered blocks over dense ids of `ReachableSubgraph`.
  const BlockBitmap* covered = nullptr;
};

// Columns keyed by block; rows are indices into the seed list.
struct SeedMatrix {
  std::map<BlockId, std::vector<std::pair<std::size_t, double>>> columns;
};

// Builds columns for `blocks` only. Blocks no seed covers get no column.
SeedMatrix build_seed_matrix(std::span<const SeedInfo> seeds,
                             std::span<const BlockId> blocks,
                             const ReachableSubgraph& subgraph);

// Coverage-guided share of each seed: score, times 0.05 when unfavored.
std::vector<double> afl_energy_weights(std::span<const SeedInfo> seeds);

struct SeedRatio {
  std::vector<double> ratio;        // r, sums to 1
  std::vector<double> propagated;   // S^ B^ w
  std::vector<double> exploration;  // c
  std::size_t propagated_columns = 0;
  // Per seed, the part of `propagated` that came from each target.
  std::vector<std::vector<std::pair<TargetId, double>>> contributions;
  // True when nothing could be propagated and r is the coverage-guided
  // distribution alone.
  bool fallback = false;
};

// Throws ContractViolation for an empty seed list. A block column missing
// from `seed_matrix` hands its share to the target's other critical blocks;
// a target left without any covered critical block is not propagated.
SeedRatio compute_seed_ratio(const BlockMatrix& block_matrix,
                             const SeedMatrix& seed_matrix,
                             const std::map<TargetId, double>& target_weights,
                             double exploration_fraction,
                             std::span<const SeedInfo> seeds);

// Splits budget `e` so that (x + b) approaches distribution r. With
// `renormalize`, each sub-problem's ratio is rescaled to sum to 1 so that
// sum(x) == e; without it the sub-ratio is passed through unchanged.
std::vector<double> approach_ratio(double e, std::span<const double> b,
                                   std::span<const double> r,
                                   bool renormalize = true);

// Integer split of `x` summing to `total` (largest remainder, ties to the
// lower index).
std::vector<std::uint64_t> round_allocation(std::span<const double> x,
                                            std::uint64_t total);

struct SeedStats {
  double exec_time = 1.0;
  double trace_bits = 0.0;
};

struct CorpusAverages {
  double exec_time = 1.0;
  double trace_bits = 0.0;
};

CorpusAverages corpus_averages(std::span<const SeedStats> seeds);

// 100 * clamp(avg_time / time, 0.1, 3) * clamp(bits / avg_bits, 0.25, 4).
double score_seed(const SeedStats& seed, const CorpusAverages& avg);

}  // namespace runfuzz

#endif  // RUNFUZZ_ENERGY_HPP_
