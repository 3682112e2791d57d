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

#ifndef RUNFUZZ_CLI_HPP_
#define RUNFUZZ_CLI_HPP_

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "runfuzz/harness.hpp"
#include "runfuzz/scheduler.hpp"

namespace runfuzz {

inline constexpr int kExitClean = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCrash = 2;

struct RunOptions {
  std::string program;
  std::string targets;    // optional targets file
  std::string out_dir;
  std::string seeds_dir;  // optional initial corpus
  CampaignConfig config;
};

struct AnalyzeOptions {
  std::string program;
  std::string targets;
  bool distances = false;
  bool subgraph = false;
  std::string critical;  // covered-block list file
};

// Loads a program and, when given, replaces its targets with the targets
// file. Warnings go to `err`.
SimProgram load_setup(const std::string& program, const std::string& targets,
                      std::ostream& err);

// Resolved configuration as written to fuzzer_setup; readable back through
// `run --config`.
std::vector<std::pair<std::string, std::string>> describe_config(const RunOptions& opts);

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_stats(const std::string& dir, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_showmap(const std::string& program, const std::string& input,
                std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace runfuzz

#endif  // RUNFUZZ_CLI_HPP_
