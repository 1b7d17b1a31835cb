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

#ifndef FPIM_ADAPTIVE_HPP_
#define FPIM_ADAPTIVE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fpim/coordinate_descent.hpp"
#include "fpim/diffusion.hpp"
#include "fpim/graph.hpp"
#include "fpim/rr_index.hpp"
#include "fpim/seed_model.hpp"
#include "fpim/stage2_select.hpp"

namespace fpim {

enum class Stage2Mode { kCd, kGs, kMgs };
enum class ResidualMode { kRebuild, kFilter };

struct PolicyConfig {
  double b1 = 0.0;
  double b2 = 0.0;
  DiscountRateSet rates = DiscountRateSet::uniform_grid(10);
  Stage2Mode stage2_mode = Stage2Mode::kMgs;
  DiscountRateSet stage2_rates{{0.5, 1.0}};
  std::size_t delta_samples = 1;
  std::size_t theta = 10000;
  ResidualMode residual_mode = ResidualMode::kRebuild;
  CDConfig stage2_cd{};

  void validate() const;
};

// The hidden outcome of one repetition, shared by every policy run against
// it: an acceptance draw per (user, offer) and a live/dead state per edge.
class World {
 public:
  // Fixed acceptance outcomes for replays: script(u, c, stage2).
  using Script = std::function<bool(NodeId, double, bool)>;

  World() = default;
  World(const Graph& g, std::uint64_t seed);
  World(DiffusionRealization realization, Script script)
      : realization_(std::move(realization)), script_(std::move(script)) {}

  // Offer of discount c to user u in stage 1 (keyed by the offered rate).
  bool accepts_offer(const ProfileMap& profiles, NodeId u, double c) const;
  // The single stage-2 offer to user u.
  bool accepts_stage2(const ProfileMap& profiles, NodeId u, double c) const;
  const DiffusionRealization& realization() const { return realization_; }

 private:
  double draw(NodeId u, std::uint64_t key) const;
  std::uint64_t seed_ = 0;
  DiffusionRealization realization_;
  Script script_;
};

struct Stage2Record {
  Action owner;
  double budget = 0.0;             // (b2 / b1) * d(owner)
  DiscountAllocation allocation;   // one entry per offered candidate
  NodeSet seeds;
  NodeSet newly_influenced;
};

struct RoundRecord {
  std::size_t round = 0;
  Action action{};
  bool accepted = false;
  DiscountAllocation stage2_alloc;
  NodeSet new_seeds;
  std::size_t newly_influenced_count = 0;
  double spent_b1 = 0.0;
  double spent_b2 = 0.0;
};

struct SeedingHistory {
  std::vector<std::pair<Action, bool>> steps;
  std::vector<Stage2Record> stage2_allocs;
  NodeSet agents;
  NodeSet influenced;
  double spent_b1 = 0.0;
  double spent_b2 = 0.0;
  std::vector<RoundRecord> rounds;
};

// Shared state for benefit computations.
struct PolicyContext {
  const Graph& g;
  NodeSet x;
  const ProfileMap& profiles;
  PolicyConfig cfg;
  std::vector<NodeId> owner;  // assign_owners(g, x)
  std::uint64_t seed = 0;

  PolicyContext(const Graph& g, NodeSet x, const ProfileMap& profiles,
                PolicyConfig cfg, std::uint64_t seed);
};

// Newly reachable stage-2 candidates of agent v: its owned neighbors not
// yet influenced.
NodeSet newly_reachable(const PolicyContext& ctx, const SeedingHistory& hist,
                        NodeId v);

// Stage-2 allocation for candidates r with the given budget on a residual
// index; value is its estimated influence.
struct Stage2Plan {
  DiscountAllocation allocation;
  double value = 0.0;
};
Stage2Plan plan_stage2(const PolicyContext& ctx, const RRIndex& residual,
                       const NodeSet& r, double budget, std::uint64_t stream);

// Delta(y | history): estimated influence the stage-2 plan for v(y) would
// add on the residual graph, assuming v(y) accepts.
double marginal_benefit(const Action& y, const SeedingHistory& hist,
                        const PolicyContext& ctx, const RRIndex& residual);

// Feasible action with the best Delta / d (ties: larger Delta, smaller
// discount, lower user); nullopt if nothing fits.
std::optional<Action> select_action(
    std::span<const Action> space, double remaining_b1,
    const std::function<double(const Action&)>& benefit);

// Picks an action instead of the greedy rule (replays and audits).
using ActionChooser =
    std::function<std::optional<Action>(std::span<const Action> feasible)>;

SeedingHistory run_policy(const PolicyContext& ctx, const World& world,
                          const RRIndex* initial_index = nullptr,
                          const ActionChooser& chooser = {});

// One-stage adaptive seeding of X with budget b; Delta is the user's own
// residual influence.
SeedingHistory baseline_ada(const Graph& g, const NodeSet& x,
                            const ProfileMap& profiles, double b,
                            const DiscountRateSet& rates, std::size_t theta,
                            ResidualMode residual_mode, const World& world,
                            std::uint64_t seed,
                            const RRIndex* initial_index = nullptr);

// Stage-2 selectors over a candidate set r on an index.
std::vector<Action> greedy_selection_gs(const NodeSet& r, double budget,
                                        const DiscountRateSet& rates,
                                        const RRIndex& idx,
                                        const ProfileMap& profiles);
std::vector<Action> modified_greedy_mgs(const NodeSet& r, double budget,
                                        const DiscountRateSet& rates,
                                        const RRIndex& idx,
                                        const ProfileMap& profiles);

// Z = r x rates as local actions, ordered by (user, discount).
std::vector<LocalAction> local_action_space(std::size_t users,
                                            const DiscountRateSet& rates);

// One JSON object per round.
void write_trace_jsonl(const SeedingHistory& hist, const Graph& g,
                       std::ostream& out);

}  // namespace fpim

#endif  // FPIM_ADAPTIVE_HPP_
