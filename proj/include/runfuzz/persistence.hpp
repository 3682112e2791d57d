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

// Output directory layout:
//
//   <out>/queue/id:NNNNNN,{src:NNNNNN|orig:NAME},flags:cov+div
//   <out>/crashes/id:NNNNNN,{src:NNNNNN|orig:NAME}
//   <out>/stats.jsonl      one JSON object per cycle
//   <out>/fuzzer_setup     resolved configuration, key = value

#ifndef RUNFUZZ_PERSISTENCE_HPP_
#define RUNFUZZ_PERSISTENCE_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "runfuzz/scheduler.hpp"

namespace runfuzz {

class DirectorySink : public CampaignSink {
 public:
  // Creates the layout; refuses a non-empty queue directory.
  DirectorySink(std::filesystem::path dir, const Icfg& icfg);

  void on_seed(const SeedEntry& seed) override;
  void on_crash(const CrashRecord& crash) override;
  void on_cycle(const CycleStats& stats) override;

  void write_setup(const std::vector<std::pair<std::string, std::string>>& entries);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  const Icfg* icfg_;
  std::ofstream stats_;
};

// One stats.jsonl line; target names come from the graph.
std::string cycle_stats_json(const CycleStats& stats, const Icfg& icfg);

void write_file(const std::filesystem::path& path, const std::string& contents);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

struct ReportFiles {
  std::filesystem::path target_energy;
  std::filesystem::path path_diversity;
  std::filesystem::path crash_attribution;
  std::size_t cycles = 0;
  double total_energy = 0.0;
};

// Reads <dir>/stats.jsonl and the corpus and crash file names, and writes
// target_energy.csv (sorted by energy, ascending), path_diversity.csv (one
// row per cycle and target) and crash_attribution.csv into `dir`. Throws
// PersistenceError when the directory or stats file is missing.
ReportFiles write_reports(const std::filesystem::path& dir);

}  // namespace runfuzz

#endif  // RUNFUZZ_PERSISTENCE_HPP_
