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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "runfuzz/cli.hpp"
#include "runfuzz/critical.hpp"
#include "runfuzz/energy.hpp"
#include "runfuzz/error.hpp"
#include "runfuzz/harness.hpp"
#include "runfuzz/icfg.hpp"
#include "runfuzz/program.hpp"
#include "runfuzz/scheduler.hpp"

namespace py = pybind11;
using namespace runfuzz;

namespace {

std::vector<std::uint8_t> to_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::bytes from_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::string> target_names(const SimProgram& p) {
  std::vector<std::string> out;
  for (TargetId t : p.targets.target_blocks()) out.push_back(p.icfg.name(t));
  return out;
}

py::dict distances(const SimProgram& p) {
  const auto targets = p.targets.target_blocks();
  const auto d = compute_distances(p.icfg, targets);
  py::dict out;
  for (TargetId t : targets) {
    py::dict col;
    for (BlockId b = 0; b < p.icfg.block_count(); ++b)
      if (auto v = d.get(b, t)) col[py::str(p.icfg.name(b))] = *v;
    out[py::str(p.icfg.name(t))] = col;
  }
  return out;
}

py::dict critical_blocks(const SimProgram& p, const std::vector<std::string>& covered) {
  BlockBitmap bits(p.icfg.block_count());
  for (const auto& name : covered) bits.set(p.icfg.at(name));
  py::dict out;
  for (TargetId t : p.targets.target_blocks()) {
    std::vector<std::string> names;
    for (BlockId b : compute_critical_blocks(t, bits, p.icfg)) names.push_back(p.icfg.name(b));
    out[py::str(p.icfg.name(t))] = names;
  }
  return out;
}

py::dict showmap(const SimProgram& p, const py::bytes& input) {
  auto r = execute(p, to_bytes(input));
  r.trace.classify();
  py::dict edges;
  const auto t = r.trace.bytes();
  for (std::size_t i = 0; i < p.icfg.edge_count(); ++i)
    if (t[i]) edges[py::int_(i)] = bucket_index(t[i]);
  py::dict out;
  out["edges"] = edges;
  out["crashed"] = r.crashed;
  out["hang"] = r.hang;
  std::vector<std::string> blocks;
  for (BlockId b : r.blocks_executed) blocks.push_back(p.icfg.name(b));
  out["blocks"] = blocks;
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<std::string> full{"runfuzz"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : full) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::dict cycle_dict(const Campaign& c, const CycleStats& s) {
  py::dict d;
  d["cycle"] = s.cycle;
  d["aborted"] = s.aborted;
  d["execs"] = s.execs;
  d["total_execs"] = s.total_execs;
  d["corpus_size"] = s.corpus_size;
  d["clusters"] = s.clusters;
  d["covered_targets"] = s.covered_targets;
  d["unique_crashes"] = s.unique_crashes;
  d["energy_total"] = s.energy_total;
  py::dict targets;
  for (const auto& t : s.targets) {
    py::dict row;
    row["covered"] = t.covered;
    row["energy"] = t.indicator_energy;
    row["attributed_energy"] = t.attributed_energy;
    row["diversity_bits"] = t.diversity_bits;
    targets[py::str(c.program().icfg.name(t.target))] = row;
  }
  d["targets"] = targets;
  return d;
}

}  // namespace

PYBIND11_MODULE(_runfuzz, m) {
  m.doc() = "Directed greybox fuzzing over simulated programs";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<SimProgram>(m, "Program")
      .def_property_readonly("blocks",
                             [](const SimProgram& p) {
                               std::vector<std::string> out;
                               for (BlockId b = 0; b < p.icfg.block_count(); ++b)
                                 out.push_back(p.icfg.name(b));
                               return out;
                             })
      .def_property_readonly("targets", &target_names)
      .def_property_readonly("edge_count", [](const SimProgram& p) { return p.icfg.edge_count(); })
      .def_property_readonly("warnings", [](const SimProgram& p) { return p.warnings; })
      .def("distances", &distances)
      .def("critical_blocks", &critical_blocks, py::arg("covered"))
      .def("showmap", &showmap, py::arg("input"));

  m.def("load_program", &load_program, py::arg("path"));
  m.def("parse_program", [](const std::string& text) { return parse_program(text); },
        py::arg("text"));
  m.def("approach_ratio",
        [](double e, const std::vector<double>& b, const std::vector<double>& r, bool renorm) {
          return approach_ratio(e, b, r, renorm);
        },
        py::arg("budget"), py::arg("spent"), py::arg("ratio"), py::arg("renormalize") = true);

  py::class_<CampaignConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("rng_seed", &CampaignConfig::rng_seed)
      .def_readwrite("max_execs", &CampaignConfig::max_execs)
      .def_readwrite("max_seconds", &CampaignConfig::max_seconds)
      .def_readwrite("max_cycles", &CampaignConfig::max_cycles)
      .def_readwrite("k", &CampaignConfig::k)
      .def_readwrite("exploration", &CampaignConfig::exploration)
      .def_readwrite("support_threshold", &CampaignConfig::support_threshold)
      .def_readwrite("confidence_threshold", &CampaignConfig::confidence_threshold)
      .def_readwrite("execs_per_seed", &CampaignConfig::execs_per_seed)
      .def_readwrite("diversity", &CampaignConfig::diversity)
      .def_readwrite("afl_energy", &CampaignConfig::afl_energy)
      .def_readwrite("cluster", &CampaignConfig::cluster)
      .def_readwrite("renormalize", &CampaignConfig::renormalize);

  py::class_<Campaign>(m, "Campaign")
      .def(py::init<const SimProgram&, CampaignConfig>(), py::arg("program"),
           py::arg("config") = CampaignConfig{}, py::keep_alive<1, 2>())
      .def("add_seed",
           [](Campaign& c, const py::bytes& b, const std::string& name) {
             return c.add_initial_seed(to_bytes(b), name).stored;
           },
           py::arg("input"), py::arg("name") = "seed")
      .def("run_cycle", [](Campaign& c) { return cycle_dict(c, c.run_cycle()); })
      .def("run",
           [](Campaign& c) {
             py::gil_scoped_release release;
             return c.run();
           })
      .def_property_readonly("corpus",
                             [](const Campaign& c) {
                               py::list out;
                               for (const auto& s : c.corpus()) out.append(from_bytes(s.bytes));
                               return out;
                             })
      .def_property_readonly("clusters",
                             [](const Campaign& c) { return c.clusters().target_cluster_count(); })
      .def_property_readonly("covered_targets",
                             [](const Campaign& c) {
                               std::vector<std::string> out;
                               for (TargetId t : c.covered_targets())
                                 out.push_back(c.program().icfg.name(t));
                               return out;
                             })
      .def_property_readonly("execs", &Campaign::fuzz_execs)
      .def_property_readonly("cycles", &Campaign::cycles)
      .def_property_readonly("unique_crashes", &Campaign::unique_crashes)
      .def_property_readonly("history", [](const Campaign& c) {
        py::list out;
        for (const auto& s : c.history()) out.append(cycle_dict(c, s));
        return out;
      });

  m.def("cli", &cli, py::arg("args"), "Runs the command line; returns (code, stdout, stderr).");
}
