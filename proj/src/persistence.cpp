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

#include "runfuzz/persistence.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "runfuzz/error.hpp"

namespace runfuzz {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw PersistenceError(p.string() + ": " + ec.message());
}

// Pulls "key:value" out of a comma-separated corpus file name.
std::string name_field(const std::string& name, const std::string& key) {
  std::istringstream in(name);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.rfind(key + ":", 0) == 0) return part.substr(key.size() + 1);
  }
  return "";
}

std::vector<std::string> sorted_names(const fs::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError(path.string() + ": cannot open for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw PersistenceError(path.string() + ": write failed");
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError(path.string() + ": cannot open");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

DirectorySink::DirectorySink(fs::path dir, const Icfg& icfg)
    : dir_(std::move(dir)), icfg_(&icfg) {
  make_dir(dir_ / "queue");
  make_dir(dir_ / "crashes");
  if (!fs::is_empty(dir_ / "queue") || !fs::is_empty(dir_ / "crashes"))
    throw PersistenceError((dir_ / "queue").string() +
                           ": output directory already holds a campaign");
  stats_.open(dir_ / "stats.jsonl", std::ios::binary | std::ios::trunc);
  if (!stats_) throw PersistenceError((dir_ / "stats.jsonl").string() + ": cannot open");
}

void DirectorySink::on_seed(const SeedEntry& seed) {
  const std::string bytes(seed.bytes.begin(), seed.bytes.end());
  write_file(dir_ / "queue" / seed.file_name(), bytes);
}

void DirectorySink::on_crash(const CrashRecord& crash) {
  const std::string bytes(crash.bytes.begin(), crash.bytes.end());
  write_file(dir_ / "crashes" / crash.file_name(), bytes);
}

void DirectorySink::on_cycle(const CycleStats& stats) {
  stats_ << cycle_stats_json(stats, *icfg_) << '\n';
  stats_.flush();
  if (!stats_) throw PersistenceError((dir_ / "stats.jsonl").string() + ": write failed");
}

void DirectorySink::write_setup(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string text;
  for (const auto& [k, v] : entries) text += k + " = " + v + "\n";
  write_file(dir_ / "fuzzer_setup", text);
}

std::string cycle_stats_json(const CycleStats& s, const Icfg& icfg) {
  ordered_json j;
  j["cycle"] = s.cycle;
  j["aborted"] = s.aborted;
  j["budget_stop"] = s.budget_stop;
  j["execs"] = s.execs;
  j["total_execs"] = s.total_execs;
  j["corpus_size"] = s.corpus_size;
  j["coverage_bits"] = s.coverage_bits;
  j["clusters"] = s.clusters;
  j["virgin_maps"] = s.virgin_maps;
  j["covered_targets"] = s.covered_targets;
  j["unique_crashes"] = s.unique_crashes;
  j["total_crashes"] = s.total_crashes;
  j["hangs"] = s.hangs;
  j["energy_total"] = s.energy_total;
  j["unattributed_energy"] = s.unattributed_energy;
  j["fallback_energy"] = s.fallback_energy;
  ordered_json targets = ordered_json::array();
  for (const auto& t : s.targets) {
    ordered_json row;
    row["block"] = icfg.name(t.target);
    row["covered"] = t.covered;
    row["energy"] = t.indicator_energy;
    row["attributed_energy"] = t.attributed_energy;
    row["diversity_bits"] = t.diversity_bits;
    targets.push_back(std::move(row));
  }
  j["targets"] = std::move(targets);
  ordered_json seeds = ordered_json::array();
  for (const auto& e : s.seeds) {
    ordered_json row;
    row["id"] = e.id;
    row["r"] = e.ratio;
    row["x"] = e.planned;
    row["alloc"] = e.allocated;
    row["executed"] = e.executed;
    row["b"] = e.cumulative;
    seeds.push_back(std::move(row));
  }
  j["seeds"] = std::move(seeds);
  return j.dump();
}

ReportFiles write_reports(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw PersistenceError(dir.string() + ": no such campaign directory");
  const fs::path stats_path = dir / "stats.jsonl";
  std::ifstream in(stats_path);
  if (!in) throw PersistenceError(stats_path.string() + ": missing");

  ReportFiles files;
  files.target_energy = dir / "target_energy.csv";
  files.path_diversity = dir / "path_diversity.csv";
  files.crash_attribution = dir / "crash_attribution.csv";

  std::string diversity = "cycle,total_execs,target,diversity_bits\n";
  json last;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error&) {
      throw PersistenceError(stats_path.string() + ": line " + std::to_string(lineno) +
                             ": invalid JSON");
    }
    ++files.cycles;
    for (const auto& t : rec.at("targets")) {
      diversity += std::to_string(rec.at("cycle").get<std::uint64_t>()) + "," +
                   std::to_string(rec.at("total_execs").get<std::uint64_t>()) + "," +
                   t.at("block").get<std::string>() + "," +
                   std::to_string(t.at("diversity_bits").get<std::uint64_t>()) + "\n";
    }
    last = std::move(rec);
  }

  struct Row {
    std::string block;
    double attributed;
    double indicator;
  };
  std::vector<Row> rows;
  double unattributed = 0.0;
  if (!last.is_null()) {
    files.total_energy = last.at("energy_total").get<double>();
    unattributed = last.at("unattributed_energy").get<double>();
    for (const auto& t : last.at("targets"))
      rows.push_back(Row{t.at("block").get<std::string>(),
                         t.at("attributed_energy").get<double>(),
                         t.at("energy").get<double>()});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.attributed < b.attributed;
  });
  std::ostringstream energy;
  energy << std::setprecision(12);
  energy << "target,energy,indicator_energy\n";
  for (const auto& r : rows) energy << r.block << ',' << r.attributed << ',' << r.indicator << '\n';
  write_file(files.target_energy, energy.str());
  std::ostringstream summary;
  summary << std::setprecision(12);
  summary << "total_energy,unattributed_energy\n"
          << files.total_energy << ',' << unattributed << '\n';
  write_file(dir / "energy_summary.csv", summary.str());
  write_file(files.path_diversity, diversity);

  std::map<std::string, std::string> seed_flags;
  for (const auto& name : sorted_names(dir / "queue"))
    seed_flags[name_field(name, "id")] = name_field(name, "flags");
  std::string crashes = "crash,source,source_flags,diversity_crash\n";
  for (const auto& name : sorted_names(dir / "crashes")) {
    const auto src = name_field(name, "src");
    const auto flags = src.empty() ? std::string() : seed_flags[src];
    crashes += "\"" + name + "\"," + src + "," + flags + "," + (flags == "div" ? "1" : "0") + "\n";
  }
  write_file(files.crash_attribution, crashes);
  return files;
}

}  // namespace runfuzz
