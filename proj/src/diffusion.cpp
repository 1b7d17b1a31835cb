// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fpim/diffusion.hpp"

#include <cmath>

#include "fpim/parallel.hpp"

namespace fpim {

DiffusionRealization sample_realization(const Graph& g, Rng& rng) {
  DiffusionRealization r;
  r.live.resize(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    r.live[e] = uniform01(rng) < g.edge(e).prob ? 1 : 0;
  }
  return r;
}

SpreadResult propagate_residual(const Graph& g, const NodeSet& seeds,
                                const DiffusionRealization& real,
                                const std::vector<std::uint8_t>& blocked) {
  seeds.check_range(g.node_count(), "propagate");
  if (real.live.size() != g.edge_count()) {
    throw ArgumentError("realization does not match graph");
  }
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<NodeId> order;
  auto is_blocked = [&](NodeId u) { return !blocked.empty() && blocked[u]; };
  for (NodeId s : seeds) {
    if (!is_blocked(s) && !seen[s]) {
      seen[s] = 1;
      order.push_back(s);
    }
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::uint32_t e : g.out_edges(order[head])) {
      NodeId w = g.edge(e).target;
      if (real.live[e] && !seen[w] && !is_blocked(w)) {
        seen[w] = 1;
        order.push_back(w);
      }
    }
  }
  SpreadResult out;
  out.count = order.size();
  out.influenced = NodeSet(std::move(order));
  return out;
}

SpreadResult propagate(const Graph& g, const NodeSet& seeds,
                       const DiffusionRealization& real) {
  return propagate_residual(g, seeds, real, {});
}

namespace {

constexpr std::size_t kRunsPerChunk = 1024;

// Cascade with coins flipped on first touch; `stamp` marks visits.
class Cascade {
 public:
  explicit Cascade(const Graph& g) : g_(g), mark_(g.node_count(), 0) {}

  template <class Seeds>
  std::size_t run(const Seeds& seeds, Rng& rng) {
    if (++epoch_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      epoch_ = 1;
    }
    queue_.clear();
    for (NodeId s : seeds) {
      if (mark_[s] != epoch_) {
        mark_[s] = epoch_;
        queue_.push_back(s);
      }
    }
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      for (std::uint32_t e : g_.out_edges(queue_[head])) {
        const Edge& edge = g_.edge(e);
        if (mark_[edge.target] == epoch_) continue;
        if (uniform01(rng) < edge.prob) {
          mark_[edge.target] = epoch_;
          queue_.push_back(edge.target);
        }
      }
    }
    return queue_.size();
  }

 private:
  const Graph& g_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> queue_;
};

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

template <class RunFn>
SpreadEstimate run_chunked(const Graph& g, std::size_t runs,
                           std::uint64_t seed, unsigned workers, RunFn&& fn) {
  if (runs == 0) throw ArgumentError("runs must be >= 1");
  if (workers == 0) workers = default_workers();
  std::size_t chunks = (runs + kRunsPerChunk - 1) / kRunsPerChunk;
  std::vector<Moments> parts(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    Rng rng = make_stream(seed, c);
    Cascade cascade(g);
    std::size_t begin = c * kRunsPerChunk;
    std::size_t end = std::min(runs, begin + kRunsPerChunk);
    Moments m;
    for (std::size_t r = begin; r < end; ++r) {
      double x = static_cast<double>(fn(cascade, rng));
      m.sum += x;
      m.sum_sq += x * x;
    }
    parts[c] = m;
  });
  Moments total;
  for (const Moments& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
  }
  SpreadEstimate est;
  est.runs = runs;
  double n = static_cast<double>(runs);
  est.mean = total.sum / n;
  if (runs > 1) {
    double var = (total.sum_sq - n * est.mean * est.mean) / (n - 1.0);
    est.std_error = std::sqrt(std::max(0.0, var) / n);
  }
  return est;
}

}  // namespace

SpreadEstimate monte_carlo_spread(const Graph& g, const NodeSet& seeds,
                                  std::size_t runs, std::uint64_t seed,
                                  unsigned workers) {
  seeds.check_range(g.node_count(), "monte_carlo_spread");
  return run_chunked(g, runs, seed, workers, [&](Cascade& c, Rng& rng) {
    return c.run(seeds, rng);
  });
}

SpreadEstimate spread_under_allocation(const Graph& g,
                                       const DiscountAllocation& alloc,
                                       const ProfileMap& profiles,
                                       std::size_t runs, std::uint64_t seed,
                                       unsigned workers) {
  for (const auto& [u, c] : alloc.entries()) {
    if (u >= g.node_count()) throw ArgumentError("allocation user out of range");
    profiles.at(u);
  }
  return run_chunked(g, runs, seed, workers, [&](Cascade& c, Rng& rng) {
    thread_local std::vector<NodeId> seeds;
    seeds.clear();
    for (const auto& [u, disc] : alloc.entries()) {
      if (uniform01(rng) < profiles[u](disc)) seeds.push_back(u);
    }
    return c.run(seeds, rng);
  });
}

}  // namespace fpim
