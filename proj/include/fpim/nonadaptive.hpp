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

#ifndef FPIM_NONADAPTIVE_HPP_
#define FPIM_NONADAPTIVE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "fpim/coordinate_descent.hpp"
#include "fpim/graph.hpp"
#include "fpim/rr_index.hpp"
#include "fpim/seed_model.hpp"

namespace fpim {

struct TwoStageConfig {
  CDConfig stage1{.max_iters = 10, .custom_init = {}};
  CDConfig stage2{.max_iters = 10, .custom_init = {}};
  std::size_t samples = 200;  // agent-set samples per f estimate
};

// Stage-2 candidates of an agent set: N(S) \ X.
NodeSet stage_two_candidates(const Graph& g, const NodeSet& x,
                             const NodeSet& agents);

// Best stage-2 allocation for a realized agent set, found by CD on the
// coverage estimate and memoized by agent set. Each agent set gets its own
// stream, so results do not depend on query order.
class StageTwoOracle {
 public:
  StageTwoOracle(const Graph& g, const NodeSet& x, const RRIndex& idx,
                 const ProfileMap& profiles, double b2, CDConfig cfg,
                 std::uint64_t seed);

  double best_value(const NodeSet& agents);
  AllocationResult solve(const NodeSet& agents) const;

  const NodeSet& accessible() const { return x_; }
  const ProfileMap& profiles() const { return profiles_; }
  std::size_t cache_size() const { return memo_.size(); }

 private:
  const Graph& g_;
  NodeSet x_;
  const RRIndex& idx_;
  const ProfileMap& profiles_;
  double b2_;
  CDConfig cfg_;
  std::uint64_t seed_;
  std::map<std::vector<NodeId>, double> memo_;
};

// Mean of the best stage-2 estimate over `samples` agent sets drawn from c1.
double estimate_f(StageTwoOracle& oracle, const DiscountAllocation& c1,
                  std::size_t samples, Rng& rng);

// f as a function of stage-1 discounts over X (positions follow X). value()
// samples afresh; restricted() fixes one batch of samples S' over
// X \ {i, j} and mixes the four cases of i and j accepting in closed form.
class StageOneObjective : public AllocationObjective {
 public:
  StageOneObjective(StageTwoOracle& oracle, std::size_t samples, Rng& rng);
  std::size_t size() const override { return oracle_.accessible().size(); }
  double value(std::span<const double> c) override;
  std::function<double(double)> restricted(std::size_t i, std::size_t j,
                                           std::span<const double> c) override;
  bool deterministic() const override { return false; }

 private:
  StageTwoOracle& oracle_;
  std::size_t samples_;
  Rng& rng_;
};

// Stage-1 pair step for users i, j of X.
PairStepResult cd_pair_step_stage1(StageTwoOracle& oracle,
                                   const DiscountAllocation& c1, NodeId i,
                                   NodeId j, std::size_t samples, Rng& rng,
                                   std::size_t grid_points = 201);

struct TwoStageOutcome {
  DiscountAllocation c1;
  NodeSet agents;
  DiscountAllocation c2;
  double spread_estimate = 0.0;
  std::vector<double> stage1_trace;
  std::vector<PairStepRecord> stage1_steps;
  std::vector<double> stage2_trace;
  std::vector<PairStepRecord> stage2_steps;
};

TwoStageOutcome two_stage_cd(const Graph& g, const NodeSet& x, double b1,
                             double b2, const TwoStageConfig& cfg,
                             const RRIndex& idx, const ProfileMap& profiles,
                             Rng& rng);

// floor(b1) random agents and floor(b2) random stage-2 seeds, all at
// discount 1. spread_estimate is left at 0.
TwoStageOutcome baseline_rf(const Graph& g, const NodeSet& x, double b1,
                            double b2, Rng& rng);

// Greedy max-coverage seeds within X (lazy evaluation; ties to lower id).
NodeSet baseline_im_greedy(const NodeSet& x, std::size_t b,
                           const RRIndex& idx);

AllocationResult baseline_cd_one_stage(const Graph& g, const NodeSet& x,
                                       double b, const CDConfig& cfg,
                                       const RRIndex& idx,
                                       const ProfileMap& profiles, Rng& rng);

std::vector<double> degrees_of(const Graph& g, const NodeSet& users);

}  // namespace fpim

#endif  // FPIM_NONADAPTIVE_HPP_
