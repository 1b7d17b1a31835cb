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

#include "fpim/nonadaptive.hpp"

#include <cmath>
#include <queue>

namespace fpim {

NodeSet stage_two_candidates(const Graph& g, const NodeSet& x,
                             const NodeSet& agents) {
  return set_difference(neighborhood(g, agents), x);
}

std::vector<double> degrees_of(const Graph& g, const NodeSet& users) {
  std::vector<double> d;
  d.reserve(users.size());
  for (NodeId u : users) d.push_back(static_cast<double>(degree(g, u)));
  return d;
}

StageTwoOracle::StageTwoOracle(const Graph& g, const NodeSet& x,
                               const RRIndex& idx, const ProfileMap& profiles,
                               double b2, CDConfig cfg, std::uint64_t seed)
    : g_(g),
      x_(x),
      idx_(idx),
      profiles_(profiles),
      b2_(b2),
      cfg_(std::move(cfg)),
      seed_(seed) {
  if (!(b2 >= 0.0)) throw ArgumentError("stage-2 budget must be >= 0");
  x_.check_range(g.node_count(), "StageTwoOracle");
}

AllocationResult StageTwoOracle::solve(const NodeSet& agents) const {
  NodeSet cands = stage_two_candidates(g_, x_, agents);
  if (cands.empty()) {
    AllocationResult empty;
    empty.allocation = DiscountAllocation(b2_);
    empty.trace.push_back(0.0);
    return empty;
  }
  std::uint64_t key = 0x5eed;
  for (NodeId a : agents) key = mix_tags(key, a);
  Rng rng = make_stream(seed_, key);
  std::vector<double> degrees = degrees_of(g_, cands);
  return coordinate_descent(idx_, profiles_, cands, degrees, b2_, cfg_, rng);
}

double StageTwoOracle::best_value(const NodeSet& agents) {
  auto it = memo_.find(agents.members());
  if (it != memo_.end()) return it->second;
  double v = agents.empty() ? 0.0 : solve(agents).value;
  memo_.emplace(agents.members(), v);
  return v;
}

namespace {

std::vector<double> positions_probs(const ProfileMap& profiles,
                                    const NodeSet& x,
                                    std::span<const double> c) {
  std::vector<double> p(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) p[k] = profiles.at(x[k])(c[k]);
  return p;
}

double mean_best(StageTwoOracle& oracle, std::span<const double> p,
                 std::size_t samples, Rng& rng) {
  if (samples == 0) throw ArgumentError("samples must be >= 1");
  const NodeSet& x = oracle.accessible();
  double sum = 0.0;
  std::vector<NodeId> agents;
  for (std::size_t s = 0; s < samples; ++s) {
    agents.clear();
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (uniform01(rng) < p[k]) agents.push_back(x[k]);
    }
    sum += oracle.best_value(NodeSet(agents));
  }
  return sum / static_cast<double>(samples);
}

}  // namespace

double estimate_f(StageTwoOracle& oracle, const DiscountAllocation& c1,
                  std::size_t samples, Rng& rng) {
  const NodeSet& x = oracle.accessible();
  for (const auto& [u, c] : c1.entries()) {
    if (!x.contains(u)) throw ArgumentError("stage-1 discount outside X");
  }
  std::vector<double> c(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) c[k] = c1.get(x[k]);
  return mean_best(oracle, positions_probs(oracle.profiles(), x, c), samples,
                   rng);
}

StageOneObjective::StageOneObjective(StageTwoOracle& oracle,
                                     std::size_t samples, Rng& rng)
    : oracle_(oracle), samples_(samples), rng_(rng) {
  if (samples == 0) throw ArgumentError("samples must be >= 1");
}

double StageOneObjective::value(std::span<const double> c) {
  return mean_best(oracle_, positions_probs(oracle_.profiles(),
                                            oracle_.accessible(), c),
                   samples_, rng_);
}

std::function<double(double)> StageOneObjective::restricted(
    std::size_t i, std::size_t j, std::span<const double> c) {
  const NodeSet& x = oracle_.accessible();
  std::vector<double> p = positions_probs(oracle_.profiles(), x, c);
  // m[a][b]: mean best stage-2 value with i accepted iff a, j iff b.
  double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  std::vector<NodeId> base;
  for (std::size_t s = 0; s < samples_; ++s) {
    base.clear();
    for (std::size_t k = 0; k < x.size(); ++k) {
      double r = uniform01(rng_);
      if (k != i && k != j && r < p[k]) base.push_back(x[k]);
    }
    NodeSet b(base);
    m[0][0] += oracle_.best_value(b);
    NodeSet bi = b, bj = b;
    bi.insert(x[i]);
    bj.insert(x[j]);
    m[1][0] += oracle_.best_value(bi);
    m[0][1] += oracle_.best_value(bj);
    bi.insert(x[j]);
    m[1][1] += oracle_.best_value(bi);
  }
  double inv = 1.0 / static_cast<double>(samples_);
  double m00 = m[0][0] * inv, m10 = m[1][0] * inv, m01 = m[0][1] * inv,
         m11 = m[1][1] * inv;
  double total = c[i] + c[j];
  const SeedProbFn fi = oracle_.profiles().at(x[i]);
  const SeedProbFn fj = oracle_.profiles().at(x[j]);
  return [=](double ci) {
    double pi = fi(ci);
    double pj = fj(std::clamp(total - ci, 0.0, 1.0));
    return m00 * (1 - pi) * (1 - pj) + m10 * pi * (1 - pj) +
           m01 * (1 - pi) * pj + m11 * pi * pj;
  };
}

PairStepResult cd_pair_step_stage1(StageTwoOracle& oracle,
                                   const DiscountAllocation& c1, NodeId i,
                                   NodeId j, std::size_t samples, Rng& rng,
                                   std::size_t grid_points) {
  const NodeSet& x = oracle.accessible();
  auto pos = [&](NodeId u) {
    auto it = std::lower_bound(x.begin(), x.end(), u);
    if (it == x.end() || *it != u) {
      throw ArgumentError("stage-1 pair user outside X");
    }
    return static_cast<std::size_t>(it - x.begin());
  };
  std::size_t pi = pos(i), pj = pos(j);
  if (pi == pj) throw ArgumentError("stage-1 pair needs two distinct users");
  std::vector<double> c(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) c[k] = c1.get(x[k]);
  StageOneObjective objective(oracle, samples, rng);
  auto q = objective.restricted(pi, pj, c);
  return cd_pair_step(q, c[pi], c[pj], grid_points);
}

TwoStageOutcome two_stage_cd(const Graph& g, const NodeSet& x, double b1,
                             double b2, const TwoStageConfig& cfg,
                             const RRIndex& idx, const ProfileMap& profiles,
                             Rng& rng) {
  if (!(b1 >= 0.0) || !(b2 >= 0.0)) {
    throw ArgumentError("budgets must be >= 0");
  }
  StageTwoOracle oracle(g, x, idx, profiles, b2, cfg.stage2, rng());
  StageOneObjective objective(oracle, cfg.samples, rng);
  std::vector<double> degrees = degrees_of(g, x);
  CDOutcome stage1 = coordinate_descent(objective, b1, degrees, cfg.stage1, rng);

  TwoStageOutcome out;
  out.c1 = DiscountAllocation(b1);
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.c1.set(x[k], stage1.discounts[k]);
  }
  out.stage1_trace = std::move(stage1.trace);
  out.stage1_steps = std::move(stage1.steps);
  out.agents = sample_seed_set(out.c1, profiles, rng);
  AllocationResult stage2 = oracle.solve(out.agents);
  out.c2 = std::move(stage2.allocation);
  out.spread_estimate = stage2.value;
  out.stage2_trace = std::move(stage2.trace);
  out.stage2_steps = std::move(stage2.steps);
  return out;
}

namespace {

NodeSet random_subset(const NodeSet& from, std::size_t k, Rng& rng) {
  std::vector<NodeId> pool = from.members();
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t r = t + static_cast<std::size_t>(uniform_below(rng, pool.size() - t));
    std::swap(pool[t], pool[r]);
  }
  pool.resize(k);
  return NodeSet(std::move(pool));
}

std::size_t whole_units(double b, std::size_t cap) {
  return std::min(cap, static_cast<std::size_t>(std::floor(b + kBudgetTol)));
}

}  // namespace

TwoStageOutcome baseline_rf(const Graph& g, const NodeSet& x, double b1,
                            double b2, Rng& rng) {
  if (!(b1 >= 0.0) || !(b2 >= 0.0)) {
    throw ArgumentError("budgets must be >= 0");
  }
  x.check_range(g.node_count(), "baseline_rf");
  TwoStageOutcome out;
  out.agents = random_subset(x, whole_units(b1, x.size()), rng);
  out.c1 = DiscountAllocation(b1);
  for (NodeId u : x) out.c1.set(u, out.agents.contains(u) ? 1.0 : 0.0);
  NodeSet cands = stage_two_candidates(g, x, out.agents);
  NodeSet seeds = random_subset(cands, whole_units(b2, cands.size()), rng);
  out.c2 = DiscountAllocation(b2);
  for (NodeId u : seeds) out.c2.set(u, 1.0);
  return out;
}

NodeSet baseline_im_greedy(const NodeSet& x, std::size_t b,
                           const RRIndex& idx) {
  struct Entry {
    std::size_t gain;
    NodeId user;
    std::size_t round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.user > b.user;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (NodeId u : x) heap.push({idx.sets_containing(u).size(), u, 0});
  std::vector<std::uint8_t> covered(idx.theta(), 0);
  std::vector<NodeId> chosen;
  while (chosen.size() < b && !heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    if (top.round == chosen.size()) {
      chosen.push_back(top.user);
      for (std::uint32_t s : idx.sets_containing(top.user)) covered[s] = 1;
      continue;
    }
    std::size_t gain = 0;
    for (std::uint32_t s : idx.sets_containing(top.user)) gain += !covered[s];
    heap.push({gain, top.user, chosen.size()});
  }
  return NodeSet(std::move(chosen));
}

AllocationResult baseline_cd_one_stage(const Graph& g, const NodeSet& x,
                                       double b, const CDConfig& cfg,
                                       const RRIndex& idx,
                                       const ProfileMap& profiles, Rng& rng) {
  std::vector<double> degrees = degrees_of(g, x);
  return coordinate_descent(idx, profiles, x, degrees, b, cfg, rng);
}

}  // namespace fpim
