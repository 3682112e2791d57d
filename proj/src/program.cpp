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

#include "runfuzz/program.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "runfuzz/error.hpp"

namespace runfuzz {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::uint32_t as_uint(const json& v, const std::string& path, std::uint64_t max) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
      static_cast<std::uint64_t>(v.get<std::int64_t>()) > max)
    fail(path, "expected an integer in [0, " + std::to_string(max) + "]");
  return static_cast<std::uint32_t>(v.get<std::int64_t>());
}

std::uint8_t as_byte(const json& v, const std::string& path) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.size() != 1) fail(path, "expected a byte or a one-character string");
    return static_cast<std::uint8_t>(s[0]);
  }
  return static_cast<std::uint8_t>(as_uint(v, path, 255));
}

BlockId block_ref(const Icfg& g, const json& v, const std::string& path) {
  const auto name = as_string(v, path);
  auto b = g.find(name);
  if (!b) fail(path, "unknown block '" + name + "'");
  return *b;
}

EdgeId successor_edge(const Icfg& g, BlockId from, const json& v,
                      const std::string& path) {
  const BlockId to = block_ref(g, v, path);
  for (EdgeId e : g.out_edges(from)) {
    const auto& edge = g.edge(e);
    if (edge.kind == EdgeKind::kControlFlow && edge.dst == to) return e;
  }
  fail(path, "'" + g.name(to) + "' is not a control-flow successor of '" +
                 g.name(from) + "'");
}

Condition parse_condition(const json& c, const std::string& path) {
  Condition cond;
  cond.offset = as_uint(require(c, "offset", path), path + ".offset", 1u << 20);
  const auto op = as_string(require(c, "op", path), path + ".op");
  if (op == "==") cond.op = GuardOp::kEq;
  else if (op == "!=") cond.op = GuardOp::kNe;
  else if (op == "<") cond.op = GuardOp::kLt;
  else if (op == ">") cond.op = GuardOp::kGt;
  else if (op == "range") cond.op = GuardOp::kRange;
  else fail(path + ".op", "unknown operator '" + op + "'");
  if (cond.op == GuardOp::kRange) {
    cond.lo = as_byte(require(c, "lo", path), path + ".lo");
    cond.hi = as_byte(require(c, "hi", path), path + ".hi");
    if (cond.lo > cond.hi) fail(path, "range has lo > hi");
  } else {
    cond.value = as_byte(require(c, "value", path), path + ".value");
  }
  return cond;
}

std::vector<BlockId> block_list(const Icfg& g, const json& v, const std::string& path) {
  std::vector<BlockId> out;
  if (v.is_string()) {
    out.push_back(block_ref(g, v, path));
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(block_ref(g, v[i], path + "[" + std::to_string(i) + "]"));
  } else {
    fail(path, "expected a block name or a list of block names");
  }
  return out;
}

std::vector<std::uint8_t> parse_hex(const std::string& s, const std::string& path) {
  if (s.size() % 2 != 0) fail(path, "hex string has odd length");
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data() + 2 * i, s.data() + 2 * i + 2, v, 16);
    if (ec != std::errc() || p != s.data() + 2 * i + 2) fail(path, "invalid hex");
    out[i] = static_cast<std::uint8_t>(v);
  }
  return out;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

SimProgram parse_program(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte > 0 ? e.byte - 1 : 0)) +
                     ": invalid JSON");
  }
  if (!doc.is_object()) throw ParseError("document: expected a JSON object");

  const auto& blocks_json = require(doc, "blocks", "");
  if (!blocks_json.is_array()) fail("blocks", "expected a list");
  std::vector<std::string> blocks;
  for (std::size_t i = 0; i < blocks_json.size(); ++i)
    blocks.push_back(as_string(blocks_json[i], "blocks[" + std::to_string(i) + "]"));

  std::vector<Icfg::NamedEdge> edges;
  if (auto it = doc.find("edges"); it != doc.end()) {
    if (!it->is_array()) fail("edges", "expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = "edges[" + std::to_string(i) + "]";
      const auto& e = (*it)[i];
      if (!e.is_object()) fail(path, "expected an object");
      Icfg::NamedEdge ne;
      ne.src = as_string(require(e, "src", path), path + ".src");
      ne.dst = as_string(require(e, "dst", path), path + ".dst");
      if (auto k = e.find("kind"); k != e.end()) {
        const auto kind = as_string(*k, path + ".kind");
        if (kind == "cf") ne.kind = EdgeKind::kControlFlow;
        else if (kind == "call") ne.kind = EdgeKind::kCall;
        else fail(path + ".kind", "expected 'cf' or 'call', got '" + kind + "'");
      }
      edges.push_back(std::move(ne));
    }
  }
  const auto entry = as_string(require(doc, "entry", ""), "entry");

  SimProgram p;
  p.icfg = Icfg::FromNames(std::move(blocks), edges, entry);
  const Icfg& g = p.icfg;
  p.guards.assign(g.block_count(), std::nullopt);

  if (auto it = doc.find("guards"); it != doc.end()) {
    if (!it->is_object()) fail("guards", "expected an object keyed by block");
    for (const auto& [name, spec] : it->items()) {
      const auto path = "guards." + name;
      auto b = g.find(name);
      if (!b) fail(path, "unknown block '" + name + "'");
      if (!spec.is_object()) fail(path, "expected an object");
      Guard guard;
      if (auto cases = spec.find("cases"); cases != spec.end()) {
        if (!cases->is_array()) fail(path + ".cases", "expected a list");
        for (std::size_t i = 0; i < cases->size(); ++i) {
          const auto cpath = path + ".cases[" + std::to_string(i) + "]";
          const auto& c = (*cases)[i];
          guard.cases.push_back(GuardCase{parse_condition(c, cpath),
                                          successor_edge(g, *b, require(c, "to", cpath),
                                                         cpath + ".to")});
        }
        guard.fallback = successor_edge(g, *b, require(spec, "default", path),
                                        path + ".default");
      } else {
        guard.cases.push_back(GuardCase{
            parse_condition(spec, path),
            successor_edge(g, *b, require(spec, "then", path), path + ".then")});
        guard.fallback = successor_edge(g, *b, require(spec, "else", path), path + ".else");
      }
      p.guards[*b] = std::move(guard);
    }
  }

  std::map<std::string, double> weights;
  if (auto it = doc.find("target_weights"); it != doc.end()) {
    if (!it->is_object()) fail("target_weights", "expected an object");
    for (const auto& [loc, w] : it->items()) {
      if (!w.is_number() || w.get<double>() < 0.0)
        fail("target_weights." + loc, "expected a non-negative number");
      weights[loc] = w.get<double>();
    }
  }
  auto read_locations = [&](const char* key) {
    std::vector<TargetLocation> out;
    auto it = doc.find(key);
    if (it == doc.end()) return out;
    if (!it->is_object()) fail(key, "expected an object keyed by location");
    for (const auto& [loc, v] : it->items()) {
      TargetLocation tl;
      tl.name = loc;
      tl.blocks = block_list(g, v, std::string(key) + "." + loc);
      if (auto w = weights.find(loc); w != weights.end()) tl.weight = w->second;
      out.push_back(std::move(tl));
    }
    return out;
  };
  TargetSpec spec;
  for (auto& loc : read_locations("targets")) {
    if (loc.blocks.empty()) {
      p.warnings.push_back("targets." + loc.name +
                           ": target location is not contained in any block; dropped");
      continue;
    }
    spec.locations.push_back(std::move(loc));
  }
  for (const auto& [loc, w] : weights) {
    if (!doc.contains("targets") || !doc.at("targets").contains(loc)) fail("target_weights." + loc, "not a declared target");
  }
  p.locations = read_locations("locations");

  if (auto it = doc.find("crash_rules"); it != doc.end()) {
    if (!it->is_array()) fail("crash_rules", "expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = "crash_rules[" + std::to_string(i) + "]";
      const auto& r = (*it)[i];
      if (!r.is_object()) fail(path, "expected an object");
      CrashRule rule;
      rule.block = block_ref(g, require(r, "block", path), path + ".block");
      if (auto req = r.find("requires"); req != r.end() && !req->is_null())
        rule.requires_prior = block_ref(g, *req, path + ".requires");
      p.crash_rules.push_back(rule);
    }
  }

  if (auto it = doc.find("seeds"); it != doc.end()) {
    if (!it->is_array()) fail("seeds", "expected a list of hex strings");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = "seeds[" + std::to_string(i) + "]";
      p.seeds.push_back(parse_hex(as_string((*it)[i], path), path));
    }
  }

  p.set_targets(std::move(spec));
  p.finalize();
  return p;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SimProgram load_program(const std::string& path) {
  const auto text = read_text_file(path);
  try {
    return parse_program(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

TargetsFileResult parse_targets_file(std::string_view text, const SimProgram& program) {
  TargetsFileResult out;
  auto lookup = [&](const std::string& name) -> const TargetLocation* {
    for (const auto& l : program.targets.locations)
      if (l.name == name) return &l;
    for (const auto& l : program.locations)
      if (l.name == name) return &l;
    return nullptr;
  };
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string loc;
    if (!(fields >> loc)) continue;
    double weight = 1.0;
    std::string wtext;
    if (fields >> wtext) {
      auto [p, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), weight);
      if (ec != std::errc() || p != wtext.data() + wtext.size() || weight < 0.0)
        throw ParseError("line " + std::to_string(lineno) + ": invalid weight '" +
                         wtext + "'");
    }
    std::string extra;
    if (fields >> extra)
      throw ParseError("line " + std::to_string(lineno) + ": unexpected '" + extra + "'");
    const TargetLocation* known = lookup(loc);
    if (known == nullptr || known->blocks.empty()) {
      out.warnings.push_back("line " + std::to_string(lineno) + ": target location '" +
                             loc + "' is not contained in any block; dropped");
      continue;
    }
    TargetLocation tl = *known;
    tl.weight = weight;
    out.spec.locations.push_back(std::move(tl));
  }
  return out;
}

TargetsFileResult load_targets_file(const std::string& path, const SimProgram& program) {
  const auto text = read_text_file(path);
  try {
    return parse_targets_file(text, program);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace runfuzz
