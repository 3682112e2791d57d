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

#include "runfuzz/harness.hpp"

#include <algorithm>
#include <array>

#include "runfuzz/error.hpp"

namespace runfuzz {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::array<std::uint8_t, 9> kInteresting = {0,    1,    0x10, 0x20, 0x40,
                                                      0x64, 0x7f, 0x80, 0xff};

}  // namespace

bool Condition::holds(std::span<const std::uint8_t> input) const {
  const std::uint8_t v = offset < input.size() ? input[offset] : 0;
  switch (op) {
    case GuardOp::kEq: return v == value;
    case GuardOp::kNe: return v != value;
    case GuardOp::kLt: return v < value;
    case GuardOp::kGt: return v > value;
    case GuardOp::kRange: return v >= lo && v <= hi;
  }
  return false;
}

void SimProgram::set_targets(TargetSpec spec) {
  targets = std::move(spec);
  const auto blocks = targets.target_blocks();
  subgraph = reachable_subgraph(icfg, blocks);
}

void SimProgram::finalize() {
  const std::size_t n = icfg.block_count();
  guards.resize(n);
  call_edge.assign(n, std::nullopt);
  sole_successor.assign(n, std::nullopt);
  for (BlockId b = 0; b < n; ++b) {
    std::vector<EdgeId> cf;
    for (EdgeId e : icfg.out_edges(b)) {
      const auto& edge = icfg.edge(e);
      if (edge.kind == EdgeKind::kCall) {
        if (call_edge[b])
          throw ParseError("block '" + icfg.name(b) + "' has more than one call edge");
        call_edge[b] = e;
      } else {
        cf.push_back(e);
      }
    }
    if (guards[b]) continue;
    if (cf.size() == 1) {
      sole_successor[b] = cf.front();
    } else if (cf.size() > 1) {
      throw ParseError("guards: block '" + icfg.name(b) + "' has " +
                       std::to_string(cf.size()) +
                       " control-flow successors but no guard");
    }
  }
  for (const auto& rule : crash_rules) {
    if (rule.block >= n) throw ParseError("crash_rules: unknown block");
  }
  if (subgraph.dense.size() != n) set_targets(std::move(targets));
}

Executor::Executor(const SimProgram& program, std::uint64_t step_limit)
    : program_(&program), step_limit_(step_limit) {
  if (step_limit == 0) throw ContractViolation("step limit must be positive");
  result_.trace = ExecutionTrace(program.trace_size());
  result_.blocks = BlockBitmap(program.subgraph.size());
  seen_.assign(program.icfg.block_count(), 0);
}

const ExecResult& Executor::run(std::span<const std::uint8_t> input) {
  const SimProgram& p = *program_;
  ExecResult& r = result_;
  r.trace.clear();
  r.blocks.reset();
  for (BlockId b : r.blocks_executed) seen_[b] = 0;
  r.blocks_executed.clear();
  r.crashed = false;
  r.hang = false;
  r.crash_block = kInvalidBlock;
  r.steps = 0;
  stack_.clear();

  BlockId cur = p.icfg.entry();
  while (true) {
    if (r.steps >= step_limit_) {
      r.hang = true;
      break;
    }
    ++r.steps;
    for (const auto& rule : p.crash_rules) {
      if (rule.block != cur) continue;
      if (!rule.requires_prior || seen_[*rule.requires_prior]) {
        r.crashed = true;
        r.crash_block = cur;
        break;
      }
    }
    if (!seen_[cur]) {
      seen_[cur] = 1;
      r.blocks_executed.push_back(cur);
      if (p.subgraph.contains(cur)) r.blocks.set(p.subgraph.dense_id(cur));
    }
    if (r.crashed) break;

    std::optional<EdgeId> next;
    if (const auto& g = p.guards[cur]) {
      next = g->fallback;
      for (const auto& c : g->cases) {
        if (c.condition.holds(input)) {
          next = c.edge;
          break;
        }
      }
    } else {
      next = p.sole_successor[cur];
    }

    if (const auto call = p.call_edge[cur]) {
      r.trace.hit(*call);
      if (next) {
        r.trace.hit(*next);
        stack_.push_back(p.icfg.edge(*next).dst);
      } else {
        stack_.push_back(kInvalidBlock);
      }
      cur = p.icfg.edge(*call).dst;
      continue;
    }
    if (next) {
      r.trace.hit(*next);
      cur = p.icfg.edge(*next).dst;
      continue;
    }
    // Return to the innermost caller that still has somewhere to go.
    cur = kInvalidBlock;
    while (!stack_.empty() && cur == kInvalidBlock) {
      cur = stack_.back();
      stack_.pop_back();
    }
    if (cur == kInvalidBlock) break;
  }
  std::sort(r.blocks_executed.begin(), r.blocks_executed.end());
  return r;
}

ExecResult execute(const SimProgram& program, std::span<const std::uint8_t> input,
                   std::uint64_t step_limit) {
  Executor ex(program, step_limit);
  return ex.run(input);
}

MutationEngine::MutationEngine(std::uint64_t rng_seed, std::size_t max_length)
    : rng_seed_(rng_seed), max_length_(std::max<std::size_t>(1, max_length)) {}

std::uint64_t MutationEngine::deterministic_stages(std::size_t length) {
  if (length == 0) return 0;
  const std::uint64_t bits = 8 * static_cast<std::uint64_t>(length);
  // Walking windows of width 1, 2 and 4.
  return bits + (bits - 1) + (bits >= 3 ? bits - 3 : 0);
}

std::vector<std::uint8_t> MutationEngine::mutate(std::span<const std::uint8_t> input,
                                                 std::uint64_t stage) const {
  std::vector<std::uint8_t> buf(input.begin(), input.end());
  if (buf.size() > max_length_) buf.resize(max_length_);
  const std::uint64_t bits = 8 * static_cast<std::uint64_t>(buf.size());
  auto flip = [&](std::uint64_t bit) { buf[bit / 8] ^= std::uint8_t(0x80u >> (bit % 8)); };

  std::uint64_t s = stage;
  if (bits > 0) {
    if (s < bits) {
      flip(s);
      return buf;
    }
    s -= bits;
    if (s < bits - 1) {
      flip(s);
      flip(s + 1);
      return buf;
    }
    s -= bits - 1;
    if (bits >= 3 && s < bits - 3) {
      for (int i = 0; i < 4; ++i) flip(s + i);
      return buf;
    }
  }

  std::mt19937_64 rng(splitmix(rng_seed_ ^ splitmix(stage ^ splitmix(fnv1a(input)))));
  havoc(buf, rng);
  return buf;
}

void MutationEngine::havoc(std::vector<std::uint8_t>& buf, std::mt19937_64& rng) const {
  auto below = [&](std::uint64_t n) { return n == 0 ? 0 : rng() % n; };
  const int ops = 1 + static_cast<int>(below(8));
  for (int k = 0; k < ops; ++k) {
    if (buf.empty()) {
      // Only growth makes sense on an empty buffer.
      const std::size_t add = 1 + below(16);
      for (std::size_t i = 0; i < add && buf.size() < max_length_; ++i)
        buf.push_back(static_cast<std::uint8_t>(below(256)));
      continue;
    }
    const std::size_t len = buf.size();
    switch (below(8)) {
      case 0: {
        const auto bit = below(8 * len);
        buf[bit / 8] ^= std::uint8_t(0x80u >> (bit % 8));
        break;
      }
      case 1:
        buf[below(len)] = static_cast<std::uint8_t>(below(256));
        break;
      case 2: {
        const auto pos = below(len);
        const auto delta = static_cast<std::uint8_t>(1 + below(35));
        if (below(2)) buf[pos] += delta; else buf[pos] -= delta;
        break;
      }
      case 3:
        buf[below(len)] = kInteresting[below(kInteresting.size())];
        break;
      case 4: {
        // Duplicate a chunk at a random position.
        const std::size_t from = below(len);
        const std::size_t size = 1 + below(std::min<std::size_t>(len - from, 32));
        const std::size_t at = below(len + 1);
        const std::size_t room = max_length_ - std::min(max_length_, len);
        const std::size_t n = std::min(size, room);
        if (n == 0) break;
        std::vector<std::uint8_t> chunk(buf.begin() + from, buf.begin() + from + n);
        buf.insert(buf.begin() + at, chunk.begin(), chunk.end());
        break;
      }
      case 5: {
        // Truncate to a random shorter length (never empty here).
        if (len < 2) break;
        buf.resize(1 + below(len - 1));
        break;
      }
      case 6: {
        const std::size_t add = 1 + below(16);
        for (std::size_t i = 0; i < add && buf.size() < max_length_; ++i)
          buf.push_back(static_cast<std::uint8_t>(below(256)));
        break;
      }
      default: {
        // Overwrite a chunk with a copy of another one.
        const std::size_t from = below(len);
        const std::size_t to = below(len);
        const std::size_t n = 1 + below(std::min(len - from, len - to));
        std::copy_n(std::vector<std::uint8_t>(buf.begin() + from, buf.begin() + from + n).begin(),
                    n, buf.begin() + to);
        break;
      }
    }
  }
}

}  // namespace runfuzz
