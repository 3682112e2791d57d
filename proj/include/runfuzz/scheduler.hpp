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

// Corpus, favored-seed selection and the cycle loop.
//
// A cycle plans energy once for the whole corpus, then fuzzes seeds in
// descending order of allocated energy. The cycle ends early as soon as a
// stored seed changes any target's critical blocks.

#ifndef RUNFUZZ_SCHEDULER_HPP_
#define RUNFUZZ_SCHEDULER_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "runfuzz/clustering.hpp"
#include "runfuzz/coverage.hpp"
#include "runfuzz/critical.hpp"
#include "runfuzz/energy.hpp"
#include "runfuzz/harness.hpp"
#include "runfuzz/icfg.hpp"
#include "runfuzz/top_rated.hpp"

namespace runfuzz {

enum SeedFlag : std::uint8_t { kFlagCov = 1, kFlagDiv = 2 };

// "cov", "div", "cov+div".
std::string flags_string(std::uint8_t flags);

struct SeedEntry {
  SeedId id = 0;
  std::vector<std::uint8_t> bytes;
  std::vector<std::uint8_t> trace;  // classified
  BlockBitmap covered_blocks;       // dense ids
  std::vector<TargetId> covered_targets;
  std::uint64_t exec_time = 1;      // interpreter steps
  std::size_t trace_bits = 0;
  std::uint8_t flags = 0;
  std::optional<SeedId> source;
  std::string orig;                 // initial seeds only
  bool favored = false;
  double score = 100.0;
  // Executions spent mutating this seed (the ledger entry b).
  std::uint64_t cumulative_energy = 0;

  std::uint64_t metric() const { return exec_time * bytes.size(); }
  std::string file_name() const;
};

// Greedy cover of the array's positions in index order.
std::set<SeedId> cull_queue(const TopRatedArray& array,
                            std::span<const SeedEntry> corpus);

// Union of cull_queue over the arrays; sets the favored flags on `corpus`.
std::set<SeedId> select_favored(std::span<const TopRatedArray* const> arrays,
                                std::span<SeedEntry> corpus);

struct CampaignConfig {
  std::uint64_t rng_seed = 0;
  // Fuzzing budgets; initial seeds are not counted.
  std::uint64_t max_execs = std::numeric_limits<std::uint64_t>::max();
  double max_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t max_cycles = std::numeric_limits<std::uint64_t>::max();

  double k = 1.0;
  double exploration = 0.1;
  double support_threshold = 500.0;
  double confidence_threshold = 1.0;
  std::uint64_t execs_per_seed = 512;
  std::uint64_t step_limit = kDefaultStepLimit;
  std::size_t max_input_length = kDefaultMaxInputLength;

  bool diversity = true;    // false: single primary map
  bool afl_energy = false;  // per-cycle coverage-guided energy
  bool cluster = true;      // false: one map per covered target
  bool renormalize = true;  // sub-ratio rescaling in approach_ratio
};

struct SeedCycleStats {
  SeedId id;
  double ratio;
  double planned;       // real-valued allocation x
  std::uint64_t allocated;
  std::uint64_t executed;
  std::uint64_t cumulative;
};

struct TargetStats {
  TargetId target;
  bool covered;
  double indicator_energy;   // executions of seeds covering the target
  double attributed_energy;  // each execution split by its ratio contributions
  std::size_t diversity_bits;
};

struct CycleStats {
  std::uint64_t cycle = 0;
  bool aborted = false;
  bool budget_stop = false;
  std::uint64_t execs = 0;
  std::uint64_t total_execs = 0;
  std::size_t corpus_size = 0;
  std::size_t coverage_bits = 0;
  std::size_t clusters = 0;
  std::size_t virgin_maps = 0;
  std::size_t covered_targets = 0;
  std::size_t unique_crashes = 0;
  std::uint64_t total_crashes = 0;
  std::uint64_t hangs = 0;
  double energy_total = 0.0;
  double unattributed_energy = 0.0;
  bool fallback_energy = false;
  std::vector<SeedCycleStats> seeds;
  std::vector<TargetStats> targets;
};

struct CrashRecord {
  std::uint64_t id = 0;
  std::optional<SeedId> source;
  std::string orig;
  BlockId block = kInvalidBlock;
  std::vector<std::uint8_t> bytes;

  std::string file_name() const;
};

// Receives everything a campaign persists. Implementations throw
// PersistenceError on failure.
class CampaignSink {
 public:
  virtual ~CampaignSink() = default;
  virtual void on_seed(const SeedEntry& seed) = 0;
  virtual void on_crash(const CrashRecord& crash) = 0;
  virtual void on_cycle(const CycleStats& stats) = 0;
};

struct ProcessOutcome {
  bool stored = false;
  bool crashed = false;
  bool unique_crash = false;
  bool hang = false;
  bool critical_changed = false;
  std::optional<SeedId> seed;
};

struct EnergyPlan {
  std::vector<double> ratio;
  std::vector<double> planned;
  std::vector<std::uint64_t> allocated;
  bool fallback = false;
  // How each seed's executions are credited to targets: `shares` directly,
  // `spread` split over all targets by weight.
  std::vector<std::vector<std::pair<TargetId, double>>> shares;
  std::vector<double> spread;
};

class Campaign {
 public:
  Campaign(const SimProgram& program, CampaignConfig config,
           CampaignSink* sink = nullptr);

  const CampaignConfig& config() const { return config_; }
  const SimProgram& program() const { return *program_; }

  // Executes an initial input; stored when it brings new bits.
  ProcessOutcome add_initial_seed(std::span<const std::uint8_t> bytes,
                                  const std::string& name);
  // Executes one input as if mutated from `source`.
  ProcessOutcome process(std::span<const std::uint8_t> bytes,
                         std::optional<SeedId> source);

  EnergyPlan plan_energy();
  CycleStats run_cycle();
  // Runs cycles until a budget is exhausted or the corpus is empty. Returns
  // the number of cycles run.
  std::uint64_t run();

  // Execution or wall-clock budget used up.
  bool budget_exhausted() const;

  const std::vector<SeedEntry>& corpus() const { return corpus_; }
  const TargetClusters& clusters() const { return clusters_; }
  const CriticalState& critical() const { return critical_; }
  const VirginBlocks& virgin_blocks() const { return virgin_blocks_; }
  const std::map<TargetId, double>& target_weights() const { return target_weights_; }
  const DistanceTable& distances() const { return distances_; }
  std::uint64_t total_execs() const { return total_execs_; }
  std::uint64_t fuzz_execs() const { return fuzz_execs_; }
  std::uint64_t cycles() const { return cycle_; }
  std::size_t unique_crashes() const { return unique_crashes_; }
  std::uint64_t total_crashes() const { return total_crashes_; }
  std::set<TargetId> covered_targets() const;
  const std::vector<CycleStats>& history() const { return history_; }

  // Cumulative per-target energy, keyed by target block.
  const std::map<TargetId, double>& indicator_energy() const { return indicator_; }
  const std::map<TargetId, double>& attributed_energy() const { return attributed_; }
  double unattributed_energy() const { return unattributed_; }

 private:
  ProcessOutcome run_input(std::span<const std::uint8_t> bytes,
                           std::optional<SeedId> source, const std::string& orig);
  bool store(const ExecResult& result, std::span<const std::uint8_t> bytes,
             std::optional<SeedId> source, const std::string& orig,
             ProcessOutcome& out);
  void refresh_favored();
  void account(const EnergyPlan& plan, const std::vector<std::uint64_t>& executed);
  CycleStats snapshot(std::uint64_t execs, bool aborted, bool budget_stop,
                      const EnergyPlan& plan,
                      const std::vector<std::uint64_t>& executed) const;

  const SimProgram* program_;
  CampaignConfig config_;
  CampaignSink* sink_;
  Executor executor_;
  MutationEngine mutator_;

  std::vector<TargetId> targets_;
  std::map<TargetId, double> target_weights_;
  DistanceTable distances_;
  TargetClusters clusters_;
  CriticalState critical_;
  VirginBlocks virgin_blocks_;
  VirginMap crash_map_;
  ExecutionTrace classified_;

  std::vector<SeedEntry> corpus_;
  bool favored_dirty_ = false;
  std::vector<std::vector<std::uint8_t>> diversity_;  // per target, OR of traces

  std::uint64_t total_execs_ = 0;
  std::uint64_t fuzz_execs_ = 0;
  std::uint64_t cycle_ = 0;
  std::size_t unique_crashes_ = 0;
  std::uint64_t total_crashes_ = 0;
  std::uint64_t hangs_ = 0;
  std::map<TargetId, double> indicator_;
  std::map<TargetId, double> attributed_;
  double unattributed_ = 0.0;
  std::vector<CycleStats> history_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace runfuzz

#endif  // RUNFUZZ_SCHEDULER_HPP_
