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

#include "runfuzz/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "runfuzz/critical.hpp"
#include "runfuzz/error.hpp"
#include "runfuzz/persistence.hpp"
#include "runfuzz/program.hpp"

namespace runfuzz {
namespace fs = std::filesystem;
namespace {

constexpr std::size_t kDefaultSeedLength = 16;

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::vector<std::pair<std::string, std::vector<std::uint8_t>>> initial_seeds(
    const RunOptions& opts, const SimProgram& program) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> seeds;
  if (!opts.seeds_dir.empty()) {
    std::vector<fs::path> files;
    if (!fs::is_directory(opts.seeds_dir))
      throw ParseError(opts.seeds_dir + ": not a directory");
    for (const auto& e : fs::directory_iterator(opts.seeds_dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto name = f.filename().string();
      std::replace(name.begin(), name.end(), ',', '_');
      seeds.emplace_back(name, read_binary_file(f));
    }
  } else {
    for (std::size_t i = 0; i < program.seeds.size(); ++i)
      seeds.emplace_back("seed" + std::to_string(i), program.seeds[i]);
  }
  if (seeds.empty())
    seeds.emplace_back("default", std::vector<std::uint8_t>(kDefaultSeedLength, 0));
  return seeds;
}

// Expands `run --config FILE` into the equivalent flags, placed ahead of
// the command line so that explicit flags take precedence.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2 || args[1] != "run") return args;
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::string file;
    std::size_t span = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      span = 1;
    } else {
      continue;
    }
    std::ifstream in(file);
    if (!in) throw ParseError(file + ": cannot open config file");
    std::vector<std::string> from_file;
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
      if (item.name == "++" || item.name == "--") continue;
      if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
        if (item.inputs[0] == "true") from_file.push_back("--" + item.name);
        continue;
      }
      from_file.push_back("--" + item.name);
      from_file.insert(from_file.end(), item.inputs.begin(), item.inputs.end());
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + span));
    args.insert(args.begin() + 2, from_file.begin(), from_file.end());
    break;
  }
  return args;
}

}  // namespace

SimProgram load_setup(const std::string& program, const std::string& targets,
                      std::ostream& err) {
  SimProgram p = load_program(program);
  for (const auto& w : p.warnings) err << "warning: " << program << ": " << w << "\n";
  if (!targets.empty()) {
    auto t = load_targets_file(targets, p);
    for (const auto& w : t.warnings) err << "warning: " << targets << ": " << w << "\n";
    p.set_targets(std::move(t.spec));
  }
  return p;
}

std::vector<std::pair<std::string, std::string>> describe_config(const RunOptions& o) {
  const auto& c = o.config;
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("program", o.program);
  if (!o.targets.empty()) kv.emplace_back("targets", o.targets);
  if (!o.seeds_dir.empty()) kv.emplace_back("seeds", o.seeds_dir);
  kv.emplace_back("seed", std::to_string(c.rng_seed));
  if (c.max_execs != std::numeric_limits<std::uint64_t>::max())
    kv.emplace_back("execs", std::to_string(c.max_execs));
  if (std::isfinite(c.max_seconds)) kv.emplace_back("seconds", num(c.max_seconds));
  if (c.max_cycles != std::numeric_limits<std::uint64_t>::max())
    kv.emplace_back("cycles", std::to_string(c.max_cycles));
  kv.emplace_back("k", num(c.k));
  kv.emplace_back("epsilon", num(c.exploration));
  kv.emplace_back("support", num(c.support_threshold));
  kv.emplace_back("confidence", num(c.confidence_threshold));
  kv.emplace_back("execs-per-seed", std::to_string(c.execs_per_seed));
  kv.emplace_back("step-limit", std::to_string(c.step_limit));
  kv.emplace_back("max-len", std::to_string(c.max_input_length));
  kv.emplace_back("no-diversity", c.diversity ? "false" : "true");
  kv.emplace_back("afl-energy", c.afl_energy ? "true" : "false");
  kv.emplace_back("no-cluster", c.cluster ? "false" : "true");
  kv.emplace_back("no-renormalize", c.renormalize ? "false" : "true");
  return kv;
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  SimProgram program = load_setup(opts.program, opts.targets, err);
  DirectorySink sink(opts.out_dir, program.icfg);
  sink.write_setup(describe_config(opts));
  Campaign campaign(program, opts.config, &sink);
  for (const auto& [name, bytes] : initial_seeds(opts, program))
    campaign.add_initial_seed(bytes, name);
  if (campaign.corpus().empty())
    err << "warning: no initial seed produced coverage; nothing to fuzz\n";
  campaign.run();
  out << "cycles " << campaign.cycles() << "\n"
      << "execs " << campaign.fuzz_execs() << "\n"
      << "corpus " << campaign.corpus().size() << "\n"
      << "clusters " << campaign.clusters().target_cluster_count() << "\n"
      << "covered_targets " << campaign.covered_targets().size() << "\n"
      << "unique_crashes " << campaign.unique_crashes() << "\n";
  return campaign.unique_crashes() > 0 ? kExitCrash : kExitClean;
}

int cmd_stats(const std::string& dir, std::ostream& out, std::ostream&) {
  const auto files = write_reports(dir);
  out << "cycles " << files.cycles << "\n"
      << "total_energy " << num(files.total_energy) << "\n"
      << files.target_energy.string() << "\n"
      << files.path_diversity.string() << "\n"
      << files.crash_attribution.string() << "\n";
  return kExitClean;
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
  SimProgram p = load_setup(opts.program, opts.targets, err);
  const auto targets = p.targets.target_blocks();
  const bool any = opts.distances || !opts.critical.empty();
  if (opts.subgraph || !any) {
    out << "dense_id,block\n";
    for (std::size_t i = 0; i < p.subgraph.blocks.size(); ++i)
      out << i << "," << p.icfg.name(p.subgraph.blocks[i]) << "\n";
  }
  if (opts.distances) {
    const auto dist = compute_distances(p.icfg, targets);
    out << "block,target,distance\n";
    for (TargetId t : targets) {
      for (BlockId b = 0; b < p.icfg.block_count(); ++b) {
        if (auto d = dist.get(b, t))
          out << p.icfg.name(b) << "," << p.icfg.name(t) << "," << num(*d) << "\n";
      }
    }
  }
  if (!opts.critical.empty()) {
    BlockBitmap covered(p.icfg.block_count());
    std::istringstream in(read_text_file(opts.critical));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      std::istringstream fields(line);
      std::string name;
      if (!(fields >> name)) continue;
      auto b = p.icfg.find(name);
      if (!b)
        throw ParseError(opts.critical + ": line " + std::to_string(lineno) +
                         ": unknown block '" + name + "'");
      covered.set(*b);
    }
    out << "target,critical_blocks\n";
    for (TargetId t : targets) {
      out << p.icfg.name(t) << ",";
      const auto crit = compute_critical_blocks(t, covered, p.icfg);
      for (std::size_t i = 0; i < crit.size(); ++i)
        out << (i ? " " : "") << p.icfg.name(crit[i]);
      out << "\n";
    }
  }
  return kExitClean;
}

int cmd_showmap(const std::string& program, const std::string& input,
                std::ostream& out, std::ostream& err) {
  SimProgram p = load_setup(program, "", err);
  const auto bytes = read_binary_file(input);
  auto r = execute(p, bytes);
  r.trace.classify();
  const auto t = r.trace.bytes();
  for (std::size_t i = 0; i < p.icfg.edge_count(); ++i)
    if (t[i]) out << i << ":" << bucket_index(t[i]) << "\n";
  if (r.hang) err << "hang after " << r.steps << " steps\n";
  if (r.crashed) {
    err << "crashed at block " << p.icfg.name(r.crash_block) << "\n";
    return kExitCrash;
  }
  return kExitClean;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directed greybox fuzzer over simulated programs", "runfuzz"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunOptions run;
  auto& cfg = run.config;
  std::uint64_t execs = 0, cycles = 0;
  double seconds = 0.0;
  bool no_diversity = false, no_cluster = false, no_renorm = false;
  auto* run_cmd = app.add_subcommand("run", "Run a fuzzing campaign");
  std::string config_file;
  run_cmd->add_option("--config", config_file, "Read options from a key = value file");
  run_cmd->add_option("--program", run.program, "Program document")->required();
  run_cmd->add_option("--targets", run.targets, "Targets file (location [weight])");
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--seeds", run.seeds_dir, "Directory of initial inputs");
  run_cmd->add_option("--seed", cfg.rng_seed, "RNG seed (RUNFUZZ_SEED overrides)");
  auto* execs_opt = run_cmd->add_option("--execs", execs, "Execution budget");
  auto* seconds_opt = run_cmd->add_option("--seconds", seconds, "Wall-clock budget");
  auto* cycles_opt = run_cmd->add_option("--cycles", cycles, "Cycle budget");
  run_cmd->add_option("--k", cfg.k, "Distance smoothing constant")->capture_default_str();
  run_cmd->add_option("--epsilon", cfg.exploration, "Exploration fraction")
      ->capture_default_str();
  run_cmd->add_option("--support", cfg.support_threshold, "Merge support threshold")
      ->capture_default_str();
  run_cmd->add_option("--confidence", cfg.confidence_threshold,
                      "Merge confidence threshold")
      ->capture_default_str();
  run_cmd->add_option("--execs-per-seed", cfg.execs_per_seed,
                      "Cycle budget per corpus seed")
      ->capture_default_str();
  run_cmd->add_option("--step-limit", cfg.step_limit, "Interpreter step limit")
      ->capture_default_str();
  run_cmd->add_option("--max-len", cfg.max_input_length, "Maximum input length")
      ->capture_default_str();
  run_cmd->add_flag("--no-diversity", no_diversity, "Primary virgin map only");
  run_cmd->add_flag("--afl-energy", cfg.afl_energy, "Coverage-guided energy");
  run_cmd->add_flag("--no-cluster", no_cluster, "Never merge target clusters");
  run_cmd->add_flag("--no-renormalize", no_renorm,
                    "Pass sub-ratios through unscaled in the allocator");

  std::string stats_dir;
  auto* stats_cmd = app.add_subcommand("stats", "Write reports for a campaign");
  stats_cmd->add_option("--out", stats_dir, "Campaign directory")->required();

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Static analysis dumps");
  analyze_cmd->add_option("--program", analyze.program, "Program document")->required();
  analyze_cmd->add_option("--targets", analyze.targets, "Targets file");
  analyze_cmd->add_flag("--distances", analyze.distances, "Print block-target distances");
  analyze_cmd->add_flag("--subgraph", analyze.subgraph, "Print the target-reaching subgraph");
  analyze_cmd->add_option("--critical", analyze.critical,
                          "Print critical blocks for a covered-block list");

  std::string show_program, show_input;
  auto* show_cmd = app.add_subcommand("showmap", "Print the trace of one input");
  show_cmd->add_option("--program", show_program, "Program document")->required();
  show_cmd->add_option("--input", show_input, "Input file")->required();

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
    } catch (const ParseError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    std::vector<const char*> expanded;
    for (const auto& a : args) expanded.push_back(a.c_str());
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      if (execs_opt->count()) cfg.max_execs = execs;
      if (seconds_opt->count()) cfg.max_seconds = seconds;
      if (cycles_opt->count()) cfg.max_cycles = cycles;
      if (!execs_opt->count() && !seconds_opt->count() && !cycles_opt->count()) {
        err << "error: run needs at least one of --execs, --seconds, --cycles\n";
        return kExitUsage;
      }
      cfg.diversity = !no_diversity;
      cfg.cluster = !no_cluster;
      cfg.renormalize = !no_renorm;
      if (const char* env = std::getenv("RUNFUZZ_SEED"); env && *env) {
        std::uint64_t v = 0;
        const char* end = env + std::char_traits<char>::length(env);
        auto [p, ec] = std::from_chars(env, end, v);
        if (ec != std::errc() || p != end) {
          err << "error: RUNFUZZ_SEED is not an unsigned integer\n";
          return kExitUsage;
        }
        cfg.rng_seed = v;
      }
      return cmd_run(run, out, err);
    }
    if (stats_cmd->parsed()) return cmd_stats(stats_dir, out, err);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze, out, err);
    if (show_cmd->parsed()) return cmd_showmap(show_program, show_input, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace runfuzz
