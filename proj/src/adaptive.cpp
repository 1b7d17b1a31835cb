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

#include "fpim/adaptive.hpp"

#include <bit>
#include <cmath>
#include <ostream>

#include "json.hpp"

namespace fpim {

void PolicyConfig::validate() const {
  if (!(b1 >= 0.0) || !(b2 >= 0.0)) {
    throw ArgumentError("policy budgets must be >= 0");
  }
  if (delta_samples < 1) throw ArgumentError("delta_samples must be >= 1");
  if (theta < 1) throw ArgumentError("theta must be >= 1");
  stage2_cd.validate();
}

World::World(const Graph& g, std::uint64_t seed) : seed_(seed) {
  Rng rng = make_stream(seed, stream_tag("edges"));
  realization_ = sample_realization(g, rng);
}

double World::draw(NodeId u, std::uint64_t key) const {
  std::uint64_t h = splitmix64(mix_tags(mix_tags(seed_, u), key));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

bool World::accepts_offer(const ProfileMap& profiles, NodeId u,
                          double c) const {
  if (script_) return script_(u, c, false);
  static const std::uint64_t tag = stream_tag("offer");
  return draw(u, mix_tags(tag, std::bit_cast<std::uint64_t>(c))) <
         profiles.at(u)(c);
}

bool World::accepts_stage2(const ProfileMap& profiles, NodeId u,
                           double c) const {
  if (script_) return script_(u, c, true);
  static const std::uint64_t tag = stream_tag("stage2");
  return draw(u, tag) < profiles.at(u)(c);
}

PolicyContext::PolicyContext(const Graph& g, NodeSet x,
                             const ProfileMap& profiles, PolicyConfig cfg,
                             std::uint64_t seed)
    : g(g),
      x(std::move(x)),
      profiles(profiles),
      cfg(std::move(cfg)),
      owner(assign_owners(g, this->x)),
      seed(seed) {
  this->cfg.validate();
  if (profiles.size() < g.node_count()) {
    throw ArgumentError("profile map smaller than graph");
  }
}

NodeSet newly_reachable(const PolicyContext& ctx, const SeedingHistory& hist,
                        NodeId v) {
  return set_difference(owned_by(ctx.owner, ctx.g, v), hist.influenced);
}

std::vector<LocalAction> local_action_space(std::size_t users,
                                            const DiscountRateSet& rates) {
  std::vector<LocalAction> z;
  z.reserve(users * rates.size());
  for (std::uint32_t u = 0; u < users; ++u) {
    for (double d : rates.rates()) z.push_back({u, d});
  }
  return z;
}

namespace {

Stage2Plan plan_on_model(const PolicyContext& ctx, const CoverageModel& model,
                         double budget, std::uint64_t stream) {
  Stage2Plan plan;
  plan.allocation = DiscountAllocation(budget);
  if (model.size() == 0 || budget <= kBudgetTol) return plan;
  if (ctx.cfg.stage2_mode == Stage2Mode::kCd) {
    CoverageObjective objective(model);
    std::vector<double> degrees;
    for (NodeId u : model.users()) {
      degrees.push_back(static_cast<double>(degree(ctx.g, u)));
    }
    Rng rng = make_stream(ctx.seed, stream);
    CDOutcome o =
        coordinate_descent(objective, budget, degrees, ctx.cfg.stage2_cd, rng);
    for (std::size_t k = 0; k < o.discounts.size(); ++k) {
      if (o.discounts[k] > 0.0) plan.allocation.set(model.user(k), o.discounts[k]);
    }
    plan.value = o.value;
    return plan;
  }
  std::vector<LocalAction> z =
      local_action_space(model.size(), ctx.cfg.stage2_rates);
  CoverageActionEvaluator eval(model);
  SelectionResult sel = ctx.cfg.stage2_mode == Stage2Mode::kGs
                            ? greedy_selection(eval, z, budget)
                            : modified_greedy(eval, z, budget);
  for (const auto& a : sel.actions) plan.allocation.set(model.user(a.user), a.discount);
  plan.value = sel.value;
  return plan;
}

double stage2_budget(const PolicyConfig& cfg, double d) {
  return cfg.b1 > 0.0 ? cfg.b2 / cfg.b1 * d : 0.0;
}

std::uint64_t plan_stream(NodeId v, double d, std::size_t agents) {
  return mix_tags(mix_tags(v, std::bit_cast<std::uint64_t>(d)), agents);
}

}  // namespace

Stage2Plan plan_stage2(const PolicyContext& ctx, const RRIndex& residual,
                       const NodeSet& r, double budget, std::uint64_t stream) {
  CoverageModel model(residual, r.members(), ctx.profiles);
  return plan_on_model(ctx, model, budget, stream);
}

double marginal_benefit(const Action& y, const SeedingHistory& hist,
                        const PolicyContext& ctx, const RRIndex& residual) {
  if (hist.agents.contains(y.user)) {
    throw ArgumentError("marginal_benefit: user is already an agent");
  }
  if (y.discount > ctx.cfg.b1 - hist.spent_b1 + kBudgetTol) {
    throw ArgumentError("marginal_benefit: stage-1 budget exhausted");
  }
  NodeSet r = newly_reachable(ctx, hist, y.user);
  return plan_stage2(ctx, residual, r, stage2_budget(ctx.cfg, y.discount),
                     plan_stream(y.user, y.discount, hist.agents.size()))
      .value;
}

std::optional<Action> select_action(
    std::span<const Action> space, double remaining_b1,
    const std::function<double(const Action&)>& benefit) {
  std::optional<Action> best;
  double best_ratio = 0.0, best_delta = 0.0;
  for (const Action& y : space) {
    if (y.discount > remaining_b1 + kBudgetTol) continue;
    double delta = benefit(y);
    double ratio = delta / y.discount;
    if (!best || detail::ranks_before(ratio, delta, {y.user, y.discount},
                                      best_ratio, best_delta,
                                      {best->user, best->discount})) {
      best = y;
      best_ratio = ratio;
      best_delta = delta;
    }
  }
  return best;
}

namespace {

// Residual indexes for the current influenced set, one per delta sample.
class ResidualIndexes {
 public:
  ResidualIndexes(const PolicyContext& ctx, const RRIndex* initial)
      : ctx_(ctx), initial_(initial) {}

  void refresh(const NodeSet& influenced, std::size_t round) {
    owned_.clear();
    current_.clear();
    const auto& cfg = ctx_.cfg;
    for (std::size_t s = 0; s < cfg.delta_samples; ++s) {
      if (s == 0 && influenced.empty() && initial_ != nullptr) {
        current_.push_back(initial_);
        continue;
      }
      std::uint64_t seed = mix_tags(mix_tags(ctx_.seed, stream_tag("residual")),
                                    mix_tags(round, s));
      if (cfg.residual_mode == ResidualMode::kFilter) {
        owned_.push_back(filter_for_residual(base(s), influenced));
      } else {
        owned_.push_back(
            rebuild_for_residual(ctx_.g, influenced, cfg.theta, seed));
      }
    }
    // Pointers only after owned_ stops growing.
    std::size_t k = 0;
    std::vector<const RRIndex*> resolved;
    for (std::size_t s = 0; s < cfg.delta_samples; ++s) {
      if (s < current_.size()) {
        resolved.push_back(current_[s]);
      } else {
        resolved.push_back(&owned_[k++]);
      }
    }
    current_ = std::move(resolved);
  }

  const RRIndex& operator[](std::size_t s) const { return *current_[s]; }
  std::size_t size() const { return current_.size(); }

 private:
  const RRIndex& base(std::size_t s) {
    if (s == 0 && initial_ != nullptr && initial_->has_roots()) return *initial_;
    while (bases_.size() <= s) {
      std::uint64_t seed = mix_tags(mix_tags(ctx_.seed, stream_tag("base")),
                                    bases_.size());
      bases_.push_back(build_rr_index(ctx_.g, ctx_.cfg.theta, seed));
    }
    return bases_[s];
  }

  const PolicyContext& ctx_;
  const RRIndex* initial_;
  std::vector<RRIndex> owned_;
  std::vector<RRIndex> bases_;
  std::vector<const RRIndex*> current_;
};

SeedingHistory run_loop(const PolicyContext& ctx, const World& world,
                        const RRIndex* initial, const ActionChooser& chooser,
                        bool one_stage) {
  SeedingHistory hist;
  const auto& cfg = ctx.cfg;
  std::vector<Action> space = action_space(ctx.x, cfg.rates);
  std::vector<std::uint8_t> alive(space.size(), 1);
  std::vector<double> delta(space.size(), 0.0);
  std::vector<std::uint8_t> known(space.size(), 0);
  double remaining = cfg.b1;
  ResidualIndexes indexes(ctx, initial);
  bool dirty = true;
  std::vector<std::uint8_t> blocked(ctx.g.node_count(), 0);
  const std::size_t rates = cfg.rates.size();

  // Deltas of every live action on user position p, averaged over samples.
  auto compute_user = [&](std::size_t p) {
    NodeId v = ctx.x[p];
    NodeSet r = one_stage ? NodeSet{} : newly_reachable(ctx, hist, v);
    for (std::size_t k = p * rates; k < (p + 1) * rates; ++k) {
      delta[k] = 0.0;
      known[k] = 1;
    }
    for (std::size_t s = 0; s < indexes.size(); ++s) {
      const RRIndex& idx = indexes[s];
      if (one_stage) {
        double own = hist.influenced.contains(v)
                         ? 0.0
                         : static_cast<double>(idx.sets_containing(v).size()) *
                               idx.scale();
        for (std::size_t k = p * rates; k < (p + 1) * rates; ++k) {
          delta[k] += own;
        }
        continue;
      }
      if (r.empty()) continue;
      CoverageModel model(idx, r.members(), ctx.profiles);
      for (std::size_t k = p * rates; k < (p + 1) * rates; ++k) {
        if (!alive[k]) continue;
        double d = space[k].discount;
        delta[k] += plan_on_model(ctx, model, stage2_budget(cfg, d),
                                  plan_stream(v, d, hist.agents.size()))
                        .value;
      }
    }
    double inv = 1.0 / static_cast<double>(indexes.size());
    for (std::size_t k = p * rates; k < (p + 1) * rates; ++k) delta[k] *= inv;
  };

  std::size_t round = 0;
  std::vector<Action> feasible;
  std::vector<std::size_t> feasible_k;
  while (true) {
    feasible.clear();
    feasible_k.clear();
    for (std::size_t k = 0; k < space.size(); ++k) {
      if (alive[k] && space[k].discount <= remaining + kBudgetTol) {
        feasible.push_back(space[k]);
        feasible_k.push_back(k);
      }
    }
    if (feasible.empty()) break;
    if (dirty) {
      indexes.refresh(hist.influenced, round);
      std::fill(known.begin(), known.end(), 0);
      dirty = false;
    }

    std::size_t chosen_k = space.size();
    if (chooser) {
      std::optional<Action> pick = chooser(feasible);
      if (!pick) break;
      for (std::size_t f = 0; f < feasible.size(); ++f) {
        if (feasible[f] == *pick) chosen_k = feasible_k[f];
      }
      if (chosen_k == space.size()) {
        throw ArgumentError("chooser returned an infeasible action");
      }
    } else {
      double best_ratio = 0.0, best_delta = 0.0;
      for (std::size_t k : feasible_k) {
        if (!known[k]) compute_user(k / rates);
        double ratio = delta[k] / space[k].discount;
        LocalAction here{space[k].user, space[k].discount};
        if (chosen_k == space.size() ||
            detail::ranks_before(ratio, delta[k], here, best_ratio, best_delta,
                                 {space[chosen_k].user,
                                  space[chosen_k].discount})) {
          chosen_k = k;
          best_ratio = ratio;
          best_delta = delta[k];
        }
      }
    }

    const Action y = space[chosen_k];
    ++round;
    bool accepted = world.accepts_offer(ctx.profiles, y.user, y.discount);
    hist.steps.push_back({y, accepted});
    RoundRecord rec;
    rec.round = round;
    rec.action = y;
    rec.accepted = accepted;
    if (!accepted) {
      alive[chosen_k] = 0;
      rec.spent_b1 = hist.spent_b1;
      rec.spent_b2 = hist.spent_b2;
      hist.rounds.push_back(std::move(rec));
      continue;
    }

    std::size_t p = chosen_k / rates;
    for (std::size_t k = p * rates; k < (p + 1) * rates; ++k) alive[k] = 0;
    remaining -= y.discount;
    hist.spent_b1 += y.discount;

    Stage2Record s2;
    s2.owner = y;
    NodeSet seeds;
    if (one_stage) {
      s2.allocation = DiscountAllocation(0.0);
      if (!hist.influenced.contains(y.user)) seeds.insert(y.user);
    } else {
      s2.budget = stage2_budget(cfg, y.discount);
      NodeSet r = newly_reachable(ctx, hist, y.user);
      Stage2Plan plan =
          plan_stage2(ctx, indexes[0], r, s2.budget,
                      plan_stream(y.user, y.discount, hist.agents.size()));
      s2.allocation = std::move(plan.allocation);
      for (const auto& [u, c] : s2.allocation.entries()) {
        if (world.accepts_stage2(ctx.profiles, u, c)) seeds.insert(u);
      }
      hist.spent_b2 += s2.allocation.total();
    }
    hist.agents.insert(y.user);
    SpreadResult spread =
        propagate_residual(ctx.g, seeds, world.realization(), blocked);
    for (NodeId u : spread.influenced) blocked[u] = 1;
    hist.influenced = set_union(hist.influenced, spread.influenced);
    s2.seeds = seeds;
    s2.newly_influenced = spread.influenced;

    rec.stage2_alloc = s2.allocation;
    rec.new_seeds = seeds;
    rec.newly_influenced_count = spread.count;
    rec.spent_b1 = hist.spent_b1;
    rec.spent_b2 = hist.spent_b2;
    hist.stage2_allocs.push_back(std::move(s2));
    hist.rounds.push_back(std::move(rec));
    dirty = true;
  }
  return hist;
}

}  // namespace

SeedingHistory run_policy(const PolicyContext& ctx, const World& world,
                          const RRIndex* initial_index,
                          const ActionChooser& chooser) {
  return run_loop(ctx, world, initial_index, chooser, /*one_stage=*/false);
}

SeedingHistory baseline_ada(const Graph& g, const NodeSet& x,
                            const ProfileMap& profiles, double b,
                            const DiscountRateSet& rates, std::size_t theta,
                            ResidualMode residual_mode, const World& world,
                            std::uint64_t seed, const RRIndex* initial_index) {
  PolicyConfig cfg;
  cfg.b1 = b;
  cfg.b2 = 0.0;
  cfg.rates = rates;
  cfg.theta = theta;
  cfg.residual_mode = residual_mode;
  PolicyContext ctx(g, x, profiles, cfg, seed);
  return run_loop(ctx, world, initial_index, {}, /*one_stage=*/true);
}

namespace {

std::vector<Action> select_on_index(const NodeSet& r, double budget,
                                    const DiscountRateSet& rates,
                                    const RRIndex& idx,
                                    const ProfileMap& profiles, bool mgs) {
  if (!(budget >= 0.0)) throw ArgumentError("budget must be >= 0");
  CoverageModel model(idx, r.members(), profiles);
  std::vector<LocalAction> z = local_action_space(model.size(), rates);
  CoverageActionEvaluator eval(model);
  SelectionResult sel =
      mgs ? modified_greedy(eval, z, budget) : greedy_selection(eval, z, budget);
  std::vector<Action> out;
  for (const auto& a : sel.actions) out.push_back({model.user(a.user), a.discount});
  return out;
}

}  // namespace

std::vector<Action> greedy_selection_gs(const NodeSet& r, double budget,
                                        const DiscountRateSet& rates,
                                        const RRIndex& idx,
                                        const ProfileMap& profiles) {
  return select_on_index(r, budget, rates, idx, profiles, false);
}

std::vector<Action> modified_greedy_mgs(const NodeSet& r, double budget,
                                        const DiscountRateSet& rates,
                                        const RRIndex& idx,
                                        const ProfileMap& profiles) {
  return select_on_index(r, budget, rates, idx, profiles, true);
}

void write_trace_jsonl(const SeedingHistory& hist, const Graph& g,
                       std::ostream& out) {
  for (const RoundRecord& r : hist.rounds) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["action"] = {{"user", g.label(r.action.user)},
                   {"discount", r.action.discount}};
    j["accepted"] = r.accepted;
    nlohmann::ordered_json alloc = nlohmann::ordered_json::object();
    for (const auto& [u, c] : r.stage2_alloc.entries()) {
      alloc[std::to_string(g.label(u))] = c;
    }
    j["stage2_alloc"] = alloc;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    for (NodeId u : r.new_seeds) seeds.push_back(g.label(u));
    j["new_seeds"] = seeds;
    j["newly_influenced_count"] = r.newly_influenced_count;
    j["spent_b1"] = r.spent_b1;
    j["spent_b2"] = r.spent_b2;
    out << j.dump() << '\n';
  }
}

}  // namespace fpim
