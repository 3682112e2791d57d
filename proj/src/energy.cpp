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

#include "runfuzz/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "runfuzz/error.hpp"

namespace runfuzz {
namespace {

constexpr double kUnfavoredFactor = 0.05;

template <typename Entries>
void normalize(Entries& column) {
  double sum = 0.0;
  for (const auto& e : column) sum += e.second;
  for (auto& e : column) e.second /= sum;
}

}  // namespace

BlockMatrix build_block_matrix(const CriticalMap& critical,
                               const DistanceTable& dist, double k) {
  if (!(k > 0.0)) throw ContractViolation("k must be positive");
  BlockMatrix m;
  for (const auto& [t, blocks] : critical) {
    std::vector<std::pair<BlockId, double>> column;
    for (BlockId b : blocks) {
      auto d = dist.get(b, t);
      if (!d) continue;
      column.emplace_back(b, 1.0 / (*d + k));
    }
    if (column.empty()) continue;
    normalize(column);
    m.columns.emplace(t, std::move(column));
  }
  return m;
}

SeedMatrix build_seed_matrix(std::span<const SeedInfo> seeds,
                             std::span<const BlockId> blocks,
                             const ReachableSubgraph& subgraph) {
  SeedMatrix m;
  for (BlockId b : blocks) {
    if (!subgraph.contains(b)) continue;
    const auto dense = subgraph.dense_id(b);
    std::vector<std::pair<std::size_t, double>> column;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto* cov = seeds[s].covered;
      if (cov == nullptr || dense >= cov->size() || !cov->test(dense)) continue;
      const double v = seeds[s].score * (seeds[s].favored ? 1.0 : kUnfavoredFactor);
      if (v > 0.0) column.emplace_back(s, v);
    }
    if (column.empty()) continue;
    normalize(column);
    m.columns.emplace(b, std::move(column));
  }
  return m;
}

std::vector<double> afl_energy_weights(std::span<const SeedInfo> seeds) {
  std::vector<double> w(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s)
    w[s] = seeds[s].score * (seeds[s].favored ? 1.0 : kUnfavoredFactor);
  return w;
}

SeedRatio compute_seed_ratio(const BlockMatrix& block_matrix,
                             const SeedMatrix& seed_matrix,
                             const std::map<TargetId, double>& target_weights,
                             double exploration_fraction,
                             std::span<const SeedInfo> seeds) {
  if (seeds.empty())
    throw ContractViolation("cannot plan energy for an empty corpus");
  if (exploration_fraction < 0.0)
    throw ContractViolation("exploration fraction must be non-negative");
  const std::size_t n = seeds.size();
  SeedRatio out;
  out.propagated.assign(n, 0.0);
  out.exploration.assign(n, 0.0);
  out.contributions.assign(n, {});

  double total_target_weight = 0.0;
  for (const auto& [t, w] : target_weights) {
    total_target_weight += w;
    auto col = block_matrix.columns.find(t);
    if (col == block_matrix.columns.end() || w == 0.0) continue;
    double kept = 0.0;
    for (const auto& [b, v] : col->second)
      if (seed_matrix.columns.contains(b)) kept += v;
    if (kept <= 0.0) continue;
    ++out.propagated_columns;
    for (const auto& [b, v] : col->second) {
      auto scol = seed_matrix.columns.find(b);
      if (scol == seed_matrix.columns.end()) continue;
      const double block_weight = w * v / kept;
      for (const auto& [s, sv] : scol->second) {
        out.propagated[s] += block_weight * sv;
        auto& c = out.contributions[s];
        if (c.empty() || c.back().first != t) c.emplace_back(t, 0.0);
        c.back().second += block_weight * sv;
      }
    }
  }

  const auto afl = afl_energy_weights(seeds);
  const double afl_sum = std::accumulate(afl.begin(), afl.end(), 0.0);
  const double c_total = exploration_fraction * total_target_weight;
  if (afl_sum > 0.0) {
    for (std::size_t s = 0; s < n; ++s) out.exploration[s] = c_total * afl[s] / afl_sum;
  }

  std::vector<double> w(n);
  for (std::size_t s = 0; s < n; ++s) w[s] = out.propagated[s] + out.exploration[s];
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(sum > 0.0)) {
    out.fallback = true;
    w = afl;
    sum = afl_sum;
    if (!(sum > 0.0)) {
      std::fill(w.begin(), w.end(), 1.0);
      sum = static_cast<double>(n);
    }
  }
  out.ratio.resize(n);
  for (std::size_t s = 0; s < n; ++s) out.ratio[s] = w[s] / sum;
  return out;
}

std::vector<double> approach_ratio(double e, std::span<const double> b,
                                   std::span<const double> r, bool renormalize) {
  if (b.size() != r.size())
    throw ContractViolation("budget and ratio vectors differ in length");
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  if (n == 0) return x;
  double rsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (b[i] < 0.0 || r[i] < 0.0)
      throw ContractViolation("approach_ratio needs non-negative inputs");
    rsum += r[i];
  }
  if (e < 0.0) throw ContractViolation("negative budget");
  if (rsum <= 0.0) {
    if (e > 0.0) throw ContractViolation("ratio vector sums to zero");
    return x;
  }

  // Each pass is one level of the recursion over the surviving indices.
  std::vector<std::size_t> keep(n);
  std::iota(keep.begin(), keep.end(), 0);
  std::vector<double> sub_r(r.begin(), r.end());
  while (true) {
    double total = e;
    double scale = 0.0;
    for (std::size_t i : keep) {
      total += b[i];
      scale += sub_r[i];
    }
    if (!renormalize) scale = 1.0;
    std::vector<std::size_t> next;
    next.reserve(keep.size());
    for (std::size_t i : keep) {
      const double d = total * sub_r[i] / scale;
      if (d < b[i]) {
        x[i] = 0.0;
      } else {
        next.push_back(i);
        x[i] = d - b[i];
      }
    }
    if (next.size() == keep.size()) break;
    keep = std::move(next);
  }
  return x;
}

std::vector<std::uint64_t> round_allocation(std::span<const double> x,
                                            std::uint64_t total) {
  std::vector<std::uint64_t> out(x.size(), 0);
  if (x.empty()) return out;
  double sum = 0.0;
  for (double v : x) sum += std::max(0.0, v);
  if (!(sum > 0.0)) return out;
  std::vector<double> frac(x.size());
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double exact = std::max(0.0, x[i]) * static_cast<double>(total) / sum;
    const double fl = std::floor(exact);
    out[i] = static_cast<std::uint64_t>(fl);
    frac[i] = exact - fl;
    given += out[i];
  }
  // Floating error may overshoot by a unit; take it back from the smallest
  // fractions first.
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; given < total; j = (j + 1) % order.size()) {
    ++out[order[j]];
    ++given;
  }
  for (auto it = order.rbegin(); given > total; ) {
    if (out[*it] > 0) {
      --out[*it];
      --given;
    }
    if (++it == order.rend()) it = order.rbegin();
  }
  return out;
}

CorpusAverages corpus_averages(std::span<const SeedStats> seeds) {
  CorpusAverages avg;
  if (seeds.empty()) return avg;
  double t = 0.0;
  double bits = 0.0;
  for (const auto& s : seeds) {
    t += s.exec_time;
    bits += s.trace_bits;
  }
  avg.exec_time = t / static_cast<double>(seeds.size());
  avg.trace_bits = bits / static_cast<double>(seeds.size());
  return avg;
}

double score_seed(const SeedStats& seed, const CorpusAverages& avg) {
  if (!(seed.exec_time > 0.0)) throw ContractViolation("exec_time must be positive");
  const double speed = std::clamp(avg.exec_time / seed.exec_time, 0.1, 3.0);
  double cover = 1.0;
  if (avg.trace_bits > 0.0) cover = std::clamp(seed.trace_bits / avg.trace_bits, 0.25, 4.0);
  return 100.0 * speed * cover;
}

}  // namespace runfuzz
