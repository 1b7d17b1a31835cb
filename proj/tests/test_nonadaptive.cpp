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

#include <gtest/gtest.h>

#include <cmath>

#include "fpim/coordinate_descent.hpp"
#include "fpim/nonadaptive.hpp"
#include "fpim/oracle.hpp"
#include "test_support.hpp"

namespace fpim {
namespace {

using testing::make_graph;

TEST(CdPairStep, SymmetricConcavePair) {
  auto p = SeedProbFn::quadratic_fast();
  auto q = [&](double x) { return p(x) + p(1.0 - x); };
  PairStepResult r = cd_pair_step(q, 1.0, 0.0);
  EXPECT_NEAR(r.cu, 0.5, 1e-5);
  EXPECT_NEAR(r.cv, 0.5, 1e-5);
  EXPECT_NEAR(r.value, 1.5, 1e-9);
  EXPECT_DOUBLE_EQ(r.before, 1.0);
}

TEST(CdPairStep, LinearObjectiveGoesToEndpoint) {
  // u -> w certain, v isolated, linear p: Q(c_u) = 1 + c_u.
  Graph g = make_graph(3, {{0, 2, 1.0}});
  RRIndex idx = build_rr_index(g, 30000, 3);
  CoverageModel model(idx, std::vector<NodeId>{0, 1},
                      ProfileMap::uniform(3, SeedProbFn::linear()));
  CoverageObjective obj(model);
  std::vector<double> c{0.3, 0.7};
  PairStepResult r = cd_pair_step(obj.restricted(0, 1, c), c[0], c[1]);
  EXPECT_DOUBLE_EQ(r.cu, 1.0);
  EXPECT_DOUBLE_EQ(r.cv, 0.0);
  EXPECT_NEAR(r.value, 2.0, 0.05);
  EXPECT_GE(r.value, r.before);
}

TEST(CoverageObjective, IncrementalPairMatchesFullScan) {
  Rng rng = make_stream(41, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = testing::random_graph(rng, 30, 90, {0.2, 0.5, 0.9});
    RRIndex idx = build_rr_index(g, 2000, 100 + trial);
    ProfileMap profiles = testing::random_profiles(rng, 30);
    std::vector<NodeId> users;
    for (NodeId u = 0; u < 30; u += 2) users.push_back(u);
    CoverageModel model(idx, users, profiles);
    CoverageObjective obj(model);
    std::vector<double> c(users.size());
    for (double& x : c) x = uniform01(rng);
    for (int step = 0; step < 30; ++step) {
      std::size_t i = uniform_below(rng, c.size());
      std::size_t j = (i + 1 + uniform_below(rng, c.size() - 1)) % c.size();
      auto q = obj.restricted(i, j, c);
      std::vector<double> p(c.size());
      for (std::size_t k = 0; k < c.size(); ++k) p[k] = model.prob(k, c[k]);
      PairCoefficients ref = model.pair(i, j, p);
      double total = c[i] + c[j];
      for (double x : {0.0, 0.25, 0.6, 1.0}) {
        double y = std::clamp(total - x, 0.0, 1.0);
        double want = ref.evaluate(model.prob(i, x), model.prob(j, y));
        EXPECT_NEAR(q(x), want, 1e-9 * std::max(1.0, want));
      }
      c[i] = uniform01(rng);
      c[j] = uniform01(rng);
      if (step % 7 == 0) {
        for (std::size_t k = 0; k < c.size(); ++k) p[k] = model.prob(k, c[k]);
        EXPECT_NEAR(obj.value(c), model.value(p), 1e-9);
      }
    }
  }
}

TEST(CdPairStep, DegenerateInterval) {
  int calls = 0;
  auto q = [&](double) {
    ++calls;
    return 3.0;
  };
  PairStepResult r = cd_pair_step(q, 0.0, 0.0);
  EXPECT_EQ(r.cu, 0.0);
  EXPECT_EQ(r.cv, 0.0);
  PairStepResult full = cd_pair_step(q, 1.0, 1.0);
  EXPECT_EQ(full.cu, 1.0);
  EXPECT_EQ(full.cv, 1.0);
}

TEST(CdPairStep, NeverWorseThanStart) {
  Rng rng = make_stream(1, 0);
  for (int t = 0; t < 200; ++t) {
    double a = uniform01(rng), b = uniform01(rng), w = uniform01(rng);
    auto q = [&](double x) { return std::sin(7 * x + a) + w * x * x; };
    double cu = uniform01(rng), cv = uniform01(rng);
    PairStepResult r = cd_pair_step(q, cu, cv);
    EXPECT_GE(r.value, q(cu));
    EXPECT_NEAR(r.cu + r.cv, cu + cv, 1e-12);
    EXPECT_NEAR(r.value, q(r.cu), 1e-12);
    (void)b;
  }
}

TEST(CDConfig, Validation) {
  CDConfig cfg;
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg.max_iters = 1;
  cfg.grid_points = 10;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

AllocationResult run_cd(const Graph& g, const ProfileMap& profiles,
                        const NodeSet& users, double budget,
                        CDConfig cfg = {}, std::size_t theta = 20000) {
  RRIndex idx = build_rr_index(g, theta, 11);
  Rng rng = make_stream(12, 0);
  return coordinate_descent(idx, profiles, users, degrees_of(g, users), budget,
                            cfg, rng);
}

TEST(CoordinateDescent, Examples) {
  Graph one = make_graph(1, {});
  auto r1 = run_cd(one, ProfileMap::uniform(1, SeedProbFn::linear()), {0}, 1.0);
  EXPECT_DOUBLE_EQ(r1.allocation.get(0), 1.0);

  Graph two = make_graph(2, {});
  auto r2 = run_cd(two, ProfileMap::uniform(2, SeedProbFn::quadratic_fast()),
                   {0, 1}, 1.0);
  EXPECT_NEAR(r2.allocation.get(0), 0.5, 0.005);
  EXPECT_NEAR(r2.allocation.get(1), 0.5, 0.005);

  Graph three = make_graph(3, {{0, 1, 0.5}});
  auto r3 = run_cd(three, ProfileMap::uniform(3, SeedProbFn::linear()),
                   {0, 1, 2}, 5.0);
  for (NodeId u = 0; u < 3; ++u) EXPECT_EQ(r3.allocation.get(u), 1.0);

  RRIndex idx = build_rr_index(two, 100, 1);
  Rng rng = make_stream(1, 1);
  EXPECT_THROW(coordinate_descent(idx, ProfileMap::uniform(2, SeedProbFn::linear()),
                                  {}, {}, 1.0, CDConfig{}, rng),
               ArgumentError);
}

TEST(CoordinateDescent, InitialDegreeUniform) {
  CDConfig cfg;
  std::vector<double> deg{1, 9, 5, 7, 3};
  auto c = initial_discounts(5, 2.0, deg, cfg);
  // ceil(1.5 * 2) = 3 top-degree users share the budget.
  EXPECT_NEAR(c[1], 2.0 / 3, 1e-12);
  EXPECT_NEAR(c[3], 2.0 / 3, 1e-12);
  EXPECT_NEAR(c[2], 2.0 / 3, 1e-12);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[4], 0.0);
  cfg.init_strategy = InitStrategy::kCustom;
  cfg.custom_init = {0.5, 0.5, 0, 0, 0};
  EXPECT_THROW(initial_discounts(5, 2.0, deg, cfg), ArgumentError);
  cfg.custom_init = {0.5, 0.5, 1, 0, 0};
  EXPECT_EQ(initial_discounts(5, 2.0, deg, cfg)[2], 1.0);
}

TEST(CoordinateDescent, TraceMonotoneAndBudgetConserved) {
  Rng rng = make_stream(2, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Rng build = make_stream(100 + trial, 0);
    Graph g = preferential_attachment(200, 2, 1.0, build);
    ProfileMap profiles = testing::random_profiles(rng, 200);
    NodeSet users = sample_accessible(g, 12, rng);
    double budget = 0.5 + 6.0 * uniform01(rng);
    auto r = run_cd(g, profiles, users, budget, CDConfig{}, 5000);
    EXPECT_NEAR(r.allocation.total(), std::min(budget, 12.0), 1e-9);
    for (const auto& [u, c] : r.allocation.entries()) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_GE(r.trace[k], r.trace[k - 1] - 1e-9 * std::abs(r.trace[k - 1]));
    }
    for (const auto& s : r.steps) EXPECT_GE(s.after, s.before);
    EXPECT_LE(r.sweeps, 50u);
  }
}

TEST(CoordinateDescent, NearGridOptimumOnTinyInstances) {
  Rng rng = make_stream(3, 0);
  for (int trial = 0; trial < 10; ++trial) {
    ExactInstance inst{testing::random_graph(rng, 7, 10, {0.3, 0.5, 1.0}),
                       testing::random_profiles(rng, 7)};
    NodeSet users{0, 1, 2};
    auto [best, q_best] = brute_force_best_alloc(inst, users, 1.5);
    CDConfig cfg;
    cfg.restarts = 3;
    auto r = run_cd(inst.graph, inst.profiles, users, 1.5, cfg, 50000);
    // CD only promises a local optimum; it should still be close here.
    EXPECT_GE(exact_Q(inst, r.allocation), 0.9 * q_best) << "trial " << trial;
  }
}

// X = {a}, a -> b, b isolated otherwise; linear everywhere.
struct TinyF {
  Graph g = make_graph(2, {{0, 1, 1.0}});
  ProfileMap profiles = ProfileMap::uniform(2, SeedProbFn::linear());
  RRIndex idx = build_rr_index(g, 100000, 5);
};

TEST(EstimateF, Examples) {
  TinyF t;
  StageTwoOracle oracle(t.g, {0}, t.idx, t.profiles, 1.0, CDConfig{}, 1);
  Rng rng = make_stream(4, 0);
  DiscountAllocation sure(1.0);
  sure.set(0, 1.0);
  EXPECT_NEAR(estimate_f(oracle, sure, 50, rng), 1.0, 0.02);
  DiscountAllocation zero(1.0);
  zero.set(0, 0.0);
  EXPECT_EQ(estimate_f(oracle, zero, 50, rng), 0.0);
  DiscountAllocation half(1.0);
  half.set(0, 0.5);
  EXPECT_NEAR(estimate_f(oracle, half, 10000, rng), 0.5, 0.02);
  DiscountAllocation outside(1.0);
  outside.set(1, 0.5);
  EXPECT_THROW(estimate_f(oracle, outside, 10, rng), ArgumentError);
  EXPECT_THROW(estimate_f(oracle, half, 0, rng), ArgumentError);
  EXPECT_LE(oracle.cache_size(), 2u);
}

TEST(StageTwoOracle, MemoIsOrderIndependent) {
  Rng build = make_stream(6, 0);
  Graph g = preferential_attachment(300, 2, 1.0, build);
  RRIndex idx = build_rr_index(g, 5000, 6);
  ProfileMap profiles = ProfileMap::uniform(300, SeedProbFn::quadratic_fast());
  NodeSet x{3, 50, 120, 250};
  StageTwoOracle a(g, x, idx, profiles, 2.0, CDConfig{}, 9);
  StageTwoOracle b(g, x, idx, profiles, 2.0, CDConfig{}, 9);
  double a1 = a.best_value({3, 50});
  double a2 = a.best_value({120});
  double b2 = b.best_value({120});
  double b1 = b.best_value({3, 50});
  EXPECT_EQ(a1, b1);
  EXPECT_EQ(a2, b2);
  EXPECT_EQ(a.best_value({}), 0.0);
}

TEST(CdPairStepStage1, FavorsUserWithInfluentialNeighbor) {
  // i=0 reaches 2 (which reaches 3, 4); j=1 has no neighbors.
  Graph g = make_graph(5, {{0, 2, 1.0}, {2, 3, 1.0}, {2, 4, 1.0}});
  ProfileMap profiles = ProfileMap::uniform(5, SeedProbFn::linear());
  RRIndex idx = build_rr_index(g, 20000, 7);
  StageTwoOracle oracle(g, {0, 1}, idx, profiles, 1.0, CDConfig{}, 2);
  Rng rng = make_stream(8, 0);
  DiscountAllocation c1(1.0);
  c1.set(0, 0.2);
  c1.set(1, 0.8);
  PairStepResult r = cd_pair_step_stage1(oracle, c1, 0, 1, 50, rng);
  EXPECT_DOUBLE_EQ(r.cu, 1.0);
  EXPECT_DOUBLE_EQ(r.cv, 0.0);
  EXPECT_NEAR(r.value, 3.0, 0.1);
  EXPECT_THROW(cd_pair_step_stage1(oracle, c1, 0, 0, 50, rng), ArgumentError);
  EXPECT_THROW(cd_pair_step_stage1(oracle, c1, 0, 3, 50, rng), ArgumentError);
}

TEST(CdPairStepStage1, SymmetricUsersSplit) {
  // i -> 2, j -> 3, all isolated below; stage-2 budget covers both.
  Graph g = make_graph(4, {{0, 2, 1.0}, {1, 3, 1.0}});
  ProfileMap profiles = ProfileMap::uniform(4, SeedProbFn::linear());
  profiles.set(0, SeedProbFn::quadratic_fast());
  profiles.set(1, SeedProbFn::quadratic_fast());
  RRIndex idx = build_rr_index(g, 20000, 9);
  StageTwoOracle oracle(g, {0, 1}, idx, profiles, 2.0, CDConfig{}, 3);
  Rng rng = make_stream(10, 0);
  DiscountAllocation c1(1.0);
  c1.set(0, 1.0);
  c1.set(1, 0.0);
  PairStepResult r = cd_pair_step_stage1(oracle, c1, 0, 1, 20, rng);
  // f = M10 p_i + M01 p_j with M10 ~ M01: equal split up to RR noise.
  EXPECT_NEAR(r.cu, 0.5, 0.05);
  DiscountAllocation none(0.0);
  none.set(0, 0.0);
  none.set(1, 0.0);
  PairStepResult z = cd_pair_step_stage1(oracle, none, 0, 1, 20, rng);
  EXPECT_EQ(z.cu, 0.0);
  EXPECT_EQ(z.cv, 0.0);
}

TEST(TwoStageCd, ClampAndEmptyNeighborhood) {
  Graph g = make_graph(6, {{0, 3, 1.0}, {1, 4, 1.0}, {2, 5, 0.5}});
  ProfileMap profiles = ProfileMap::uniform(6, SeedProbFn::linear());
  RRIndex idx = build_rr_index(g, 10000, 1);
  Rng rng = make_stream(2, 0);
  TwoStageConfig cfg;
  cfg.samples = 20;
  auto out = two_stage_cd(g, {0, 1, 2}, 3.0, 1.0, cfg, idx, profiles, rng);
  for (NodeId u : {0u, 1u, 2u}) EXPECT_EQ(out.c1.get(u), 1.0);
  EXPECT_EQ(out.agents, (NodeSet{0, 1, 2}));
  EXPECT_TRUE(is_subset(out.c2.users(), neighborhood(g, out.agents)));
  EXPECT_NEAR(out.c2.total(), 1.0, 1e-9);

  auto lonely = two_stage_cd(g, {3, 4}, 1.0, 1.0, cfg, idx, profiles, rng);
  EXPECT_EQ(lonely.c2.total(), 0.0);
  EXPECT_EQ(lonely.spread_estimate, 0.0);
}

TEST(TwoStageCd, StageTwoConcentratesOnHub) {
  // X = {0}; neighbors: hub 1 (reaches 3, 4, 5) and leaf 2.
  Graph g = make_graph(6, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {1, 4, 1.0},
                           {1, 5, 1.0}});
  ExactInstance inst{g, ProfileMap::uniform(6, SeedProbFn::linear())};
  RRIndex idx = build_rr_index(g, 20000, 3);
  Rng rng = make_stream(4, 0);
  TwoStageConfig cfg;
  cfg.samples = 20;
  auto out = two_stage_cd(g, {0}, 1.0, 1.0, cfg, idx, inst.profiles, rng);
  EXPECT_EQ(out.agents, (NodeSet{0}));
  auto [best, q_best] = brute_force_best_alloc(inst, {1, 2}, 1.0);
  EXPECT_NEAR(out.c2.get(1), best.get(1), 0.05);
  EXPECT_NEAR(exact_Q(inst, out.c2), q_best, 1e-9);
  for (std::size_t k = 1; k < out.stage2_trace.size(); ++k) {
    EXPECT_GE(out.stage2_trace[k], out.stage2_trace[k - 1] - 1e-9);
  }
}

TEST(BaselineRf, Examples) {
  Rng build = make_stream(5, 0);
  Graph g = preferential_attachment(200, 2, 1.0, build);
  NodeSet x{1, 10, 20, 30, 40};
  Rng rng = make_stream(6, 0);
  auto none = baseline_rf(g, x, 0.0, 4.0, rng);
  EXPECT_TRUE(none.agents.empty());
  EXPECT_TRUE(none.c2.empty());
  auto all = baseline_rf(g, x, 9.0, 4.0, rng);
  EXPECT_EQ(all.agents, x);
  EXPECT_EQ(all.c2.size(), 4u);
  for (const auto& [u, c] : all.c2.entries()) {
    EXPECT_EQ(c, 1.0);
    EXPECT_FALSE(x.contains(u));
  }
  Rng r1 = make_stream(7, 0), r2 = make_stream(7, 0);
  auto a = baseline_rf(g, x, 2.0, 8.0, r1);
  auto b = baseline_rf(g, x, 2.0, 8.0, r2);
  EXPECT_EQ(a.agents, b.agents);
  EXPECT_EQ(a.c2, b.c2);
  EXPECT_EQ(a.agents.size(), 2u);
}

TEST(BaselineIm, Examples) {
  Graph star = make_graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}});
  RRIndex idx = build_rr_index(star, 5000, 1);
  EXPECT_EQ(baseline_im_greedy({0, 1, 2, 3}, 1, idx), (NodeSet{0}));
  EXPECT_TRUE(baseline_im_greedy({0, 1}, 0, idx).empty());
  EXPECT_EQ(baseline_im_greedy({1, 2}, 5, idx), (NodeSet{1, 2}));
}

TEST(BaselineIm, GreedyRatioAgainstBruteForce) {
  Rng rng = make_stream(8, 0);
  const double floor = 1.0 - 1.0 / std::exp(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 5 + uniform_below(rng, 8);
    ExactInstance inst{testing::random_graph(rng, n, 14, {0.3, 0.5, 1.0}),
                       ProfileMap::uniform(n, SeedProbFn::linear())};
    RRIndex idx = build_rr_index(inst.graph, 20000, trial);
    std::vector<NodeId> all(n);
    for (NodeId u = 0; u < n; ++u) all[u] = u;
    for (std::size_t k = 1; k <= 3; ++k) {
      NodeSet greedy = baseline_im_greedy(NodeSet(all), k, idx);
      double opt = brute_force_best_seeds(inst, k).second;
      EXPECT_GE(exact_influence(inst, greedy), floor * opt);
    }
  }
}

TEST(BaselineCdOneStage, BudgetAndDomain) {
  Rng build = make_stream(9, 0);
  Graph g = preferential_attachment(300, 2, 1.0, build);
  RRIndex idx = build_rr_index(g, 5000, 2);
  ProfileMap profiles = ProfileMap::uniform(300, SeedProbFn::quadratic_fast());
  Rng rng = make_stream(10, 0);
  NodeSet x = sample_accessible(g, 10, rng);
  auto r = baseline_cd_one_stage(g, x, 3.0, CDConfig{}, idx, profiles, rng);
  EXPECT_EQ(r.allocation.users(), x);
  EXPECT_NEAR(r.allocation.total(), 3.0, 1e-9);
}

TEST(CoordinateRaise, ExactMonotonicity) {
  Rng rng = make_stream(11, 0);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 6;
    ExactInstance inst{testing::random_graph(rng, n, 10, {0.3, 0.5, 1.0}),
                       testing::random_profiles(rng, n)};
    DiscountAllocation a(3.0);
    for (NodeId u : {0u, 1u, 2u}) a.set(u, uniform01(rng));
    double before = exact_Q(inst, a);
    NodeId u = static_cast<NodeId>(uniform_below(rng, 3));
    a.set(u, a.get(u) + (1 - a.get(u)) * uniform01(rng));
    EXPECT_GE(exact_Q(inst, a), before - 1e-12);

    NodeSet x{0, 1};
    DiscountAllocation c1(2.0);
    c1.set(0, uniform01(rng));
    c1.set(1, uniform01(rng));
    double f0 = exact_f(inst, c1, x, 1.0, 10);
    c1.set(1, c1.get(1) + (1 - c1.get(1)) * uniform01(rng));
    EXPECT_GE(exact_f(inst, c1, x, 1.0, 10), f0 - 1e-12);
  }
}

}  // namespace
}  // namespace fpim
