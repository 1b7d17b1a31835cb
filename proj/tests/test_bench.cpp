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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpim/experiment.hpp"
#include "test_support.hpp"

namespace fpim {
namespace {

namespace fs = std::filesystem;

Graph undirected(std::size_t n, std::vector<std::pair<NodeId, NodeId>> pairs,
                 double p = 1.0) {
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) {
    edges.push_back({u, v, p});
    edges.push_back({v, u, p});
  }
  return Graph(n, std::move(edges), false);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.synthetic_n = 300;
  cfg.synthetic_m = 3;
  cfg.x_size = 20;
  cfg.budgets = {4};
  cfg.theta = 3000;
  cfg.repetitions = 2;
  cfg.mc_runs = 500;
  cfg.f_samples = 10;
  cfg.cd_iters = 3;
  cfg.two_stage_iters = 2;
  cfg.ada_cd_iters = 3;
  cfg.wall_time = false;
  cfg.seed = 11;
  return cfg;
}

std::string csv_of(const ExperimentConfig& cfg) {
  RunReport r = run_experiment(cfg, load_dataset(cfg));
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ArgumentError);
  };
  bad([](ExperimentConfig& c) { c.alphas = {0.0}; });
  bad([](ExperimentConfig& c) { c.alphas.clear(); });
  bad([](ExperimentConfig& c) { c.repetitions = 0; });
  bad([](ExperimentConfig& c) { c.split_b1 = 0.0; });
  bad([](ExperimentConfig& c) { c.split_b2 = -1.0; });
  bad([](ExperimentConfig& c) { c.algorithms = {"LP"}; });
  bad([](ExperimentConfig& c) { c.budgets = {}; });
  bad([](ExperimentConfig& c) { c.stage2_rates = {0.5}; });
  ExperimentConfig h;
  h.split_b1 = 0.0;
  h.split_heuristic = true;
  EXPECT_NO_THROW(h.validate());
}

TEST(Dataset, SyntheticAndFiles) {
  ExperimentConfig cfg = small_config();
  Graph g = load_dataset(cfg);
  EXPECT_EQ(g.node_count(), 300u);
  EXPECT_FALSE(g.directed());

  cfg.dataset = "/nonexistent/graph.txt";
  EXPECT_THROW(load_dataset(cfg), DatasetError);

  fs::path p = fs::temp_directory_path() / "fpim_bench_abc.txt";
  {
    std::ofstream out(p);
    out << "abc";
  }
  EXPECT_EQ(sha256_file(p.string()),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  {
    std::ofstream out(p);
    out << "# tiny\n1 2\n2 3\n";
  }
  cfg.dataset = p.string();
  cfg.checksum = std::string(64, '0');
  EXPECT_THROW(load_dataset(cfg), DatasetError);
  cfg.checksum = sha256_file(p.string());
  EXPECT_EQ(load_dataset(cfg).node_count(), 3u);
  {
    std::ofstream out(p);
    out << "1 x\n";
  }
  cfg.checksum.clear();
  EXPECT_THROW(load_dataset(cfg), DatasetError);
  fs::remove(p);
}

TEST(RunExperiment, SameSeedGivesIdenticalCsv) {
  ExperimentConfig cfg = small_config();
  cfg.workers = 1;
  std::string a = csv_of(cfg);
  std::string b = csv_of(cfg);
  EXPECT_EQ(a, b);
  cfg.workers = 3;
  EXPECT_EQ(a, csv_of(cfg));
  cfg.seed = 12;
  EXPECT_NE(a, csv_of(cfg));
}

TEST(RunExperiment, RandomBaselineSpreads) {
  ExperimentConfig cfg = small_config();
  cfg.algorithms = {"RF"};
  cfg.budgets = {10};
  cfg.repetitions = 1;
  RunReport r = run_experiment(cfg, load_dataset(cfg));
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_FALSE(r.runs[0].failed);
  EXPECT_GT(r.runs[0].spread, 0.0);
  EXPECT_DOUBLE_EQ(r.runs[0].b1, 2.0);
  EXPECT_DOUBLE_EQ(r.runs[0].b2, 8.0);
}

TEST(RunExperiment, EveryCellPresent) {
  ExperimentConfig cfg = small_config();
  cfg.alphas = {0.6, 1.0};
  cfg.budgets = {2, 4};
  RunReport r = run_experiment(cfg, load_dataset(cfg));
  EXPECT_EQ(r.runs.size(), 2u * 2u * 2u * known_algorithms().size());
  EXPECT_EQ(r.cells.size(), 2u * 2u * known_algorithms().size());
  for (double a : cfg.alphas) {
    for (double b : cfg.budgets) {
      for (const auto& alg : known_algorithms()) {
        const CellSummary* c = r.find(alg, a, b);
        ASSERT_NE(c, nullptr) << alg;
        EXPECT_FALSE(c->failed) << alg << ": " << c->reason;
        EXPECT_EQ(c->reps, 2u);
        EXPECT_GE(c->mean, 0.0);
      }
    }
  }
  ASSERT_NE(r.find("2CD", 1.0, 4), nullptr);
  ASSERT_NE(r.find("CD", 1.0, 4), nullptr);
  for (const auto& run : r.runs) {
    for (const auto& t : run.traces) {
      for (std::size_t k = 1; k < t.values.size(); ++k) {
        EXPECT_GE(t.values[k], t.values[k - 1] - 1e-9) << run.algorithm;
      }
    }
  }
}

TEST(RunExperiment, OversizedXIsConfigError) {
  ExperimentConfig cfg = small_config();
  cfg.x_size = 1000;
  EXPECT_THROW(run_experiment(cfg, load_dataset(cfg)), ArgumentError);
}

TEST(RunExperiment, WritesReportsAndTraces) {
  ExperimentConfig cfg = small_config();
  cfg.algorithms = {"CD", "2CD", "Ada+MGS"};
  cfg.repetitions = 1;
  fs::path dir = fs::temp_directory_path() / "fpim_bench_out";
  fs::remove_all(dir);
  cfg.out_dir = dir.string();
  RunReport r = run_experiment(cfg, load_dataset(cfg));
  write_reports(r, cfg);
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "inputs" / "accessible_r0.txt"));
  EXPECT_TRUE(fs::exists(dir / "inputs" / "profiles_r0.csv"));
  for (const auto& run : r.runs) {
    ASSERT_FALSE(run.trace_file.empty()) << run.algorithm;
    EXPECT_TRUE(fs::exists(run.trace_file));
  }
  std::ifstream csv(dir / "results.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "dataset,algorithm,alpha,B,B1,B2,rep,spread,stderr,wall_ms,seed");
  fs::remove_all(dir);
}

TEST(SplitHeuristic, Examples) {
  // Cycle: every degree is 2.
  Graph cycle = undirected(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto [a1, a2] = budget_split_heuristic(cycle, NodeSet{0});
  EXPECT_DOUBLE_EQ(a1, 0.5);
  EXPECT_DOUBLE_EQ(a2, 0.5);

  Graph star = undirected(4, {{0, 1}, {0, 2}, {0, 3}});
  auto [s1, s2] = budget_split_heuristic(star, NodeSet{1});
  EXPECT_DOUBLE_EQ(s1, 0.25);
  EXPECT_DOUBLE_EQ(s2, 0.75);

  Graph lonely = undirected(3, {{1, 2}});
  std::string warning;
  auto [e1, e2] = budget_split_heuristic(lonely, NodeSet{0}, &warning);
  EXPECT_DOUBLE_EQ(e1, 1.0);
  EXPECT_DOUBLE_EQ(e2, 0.0);
  EXPECT_FALSE(warning.empty());
}

TEST(FpCheck, RegularGraphEqualsEveryTrial) {
  std::vector<std::pair<NodeId, NodeId>> ring;
  for (NodeId u = 0; u < 50; ++u) ring.push_back({u, (u + 1) % 50});
  Graph g = undirected(50, ring);
  auto rows = fp_check(g, 5, 20, 3);
  ASSERT_EQ(rows.size(), 20u);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.stats.avg_deg_x, r.stats.avg_deg_nx);
    EXPECT_TRUE(r.stats.paradox_holds);
  }
}

TEST(FpCheck, StarHeavyGraph) {
  // One hub with 1000 leaves: any X of leaves has N(X) = {hub}.
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId l = 1; l <= 1000; ++l) pairs.push_back({0, l});
  Graph g = undirected(1001, pairs);
  auto rows = fp_check(g, 10, 100, 5);
  std::size_t holds = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    holds += rows[t].stats.paradox_holds ? 1 : 0;
    if (rows[t].stats.avg_deg_x == 1.0) {
      EXPECT_TRUE(rows[t].stats.paradox_holds);
      EXPECT_DOUBLE_EQ(rows[t].stats.avg_deg_nx, 1000.0);
    }
  }
  EXPECT_GE(holds, 95u);
}

TEST(Estimate, DeterministicInstanceAgrees) {
  Graph g = testing::make_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 3, 0.5}});
  ProfileMap profiles = ProfileMap::uniform(4, SeedProbFn::linear());
  auto rep = estimate_side_by_side(g, profiles, NodeSet{0}, {}, 50000, 20000, 1);
  ASSERT_TRUE(rep.exact.has_value());
  EXPECT_DOUBLE_EQ(*rep.exact, 3.5);
  EXPECT_NEAR(rep.rr, 3.5, 0.05 * 3.5);
  EXPECT_LE(std::abs(rep.mc - 3.5), 3.0 * rep.mc_std_error + 1e-12);

  DiscountAllocation alloc(1.0);
  alloc.set(0, 0.5);
  auto ra = estimate_side_by_side(g, profiles, {}, alloc, 50000, 20000, 1);
  EXPECT_DOUBLE_EQ(*ra.exact, 1.75);
  EXPECT_NEAR(ra.rr, 1.75, 0.05 * 1.75);

  auto empty = estimate_side_by_side(g, profiles, {}, {}, 1000, 100, 1);
  EXPECT_EQ(empty.rr, 0.0);
  EXPECT_EQ(empty.mc, 0.0);
  EXPECT_EQ(*empty.exact, 0.0);
}

}  // namespace
}  // namespace fpim
