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

#ifndef FPIM_EXPERIMENT_HPP_
#define FPIM_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fpim/adaptive.hpp"
#include "fpim/graph.hpp"
#include "fpim/nonadaptive.hpp"
#include "fpim/seed_model.hpp"

namespace fpim {

// Algorithm names accepted in a roster.
const std::vector<std::string>& known_algorithms();

struct ExperimentConfig {
  std::string dataset;       // edge-list path; empty selects the synthetic graph
  std::string dataset_name;  // CSV label; derived from the path when empty
  std::string checksum;      // expected SHA-256 (hex) of the dataset file
  bool directed = false;
  std::size_t synthetic_n = 10000;
  std::size_t synthetic_m = 5;

  std::vector<double> alphas{1.0};
  std::size_t x_size = 100;
  std::vector<double> budgets{10, 20, 30, 40, 50};
  double split_b1 = 1.0;
  double split_b2 = 4.0;
  bool split_heuristic = false;  // shares from average degrees of X, N(X)
  std::size_t theta = 0;         // 0 selects default_theta(n)
  ProfileMix mix = ProfileMix::setting1();
  std::vector<std::string> algorithms = known_algorithms();

  std::uint64_t seed = 1;
  std::size_t repetitions = 5;
  std::size_t mc_runs = 20000;

  std::size_t f_samples = 200;
  std::size_t cd_iters = 50;         // one-stage CD
  std::size_t two_stage_iters = 10;  // each stage of 2CD
  std::size_t ada_cd_iters = 50;     // stage-2 CD inside Ada+CD
  std::size_t rate_levels = 10;      // stage-1 rates {1/k, ..., 1}
  std::vector<double> stage2_rates{0.5, 1.0};
  ResidualMode residual_mode = ResidualMode::kRebuild;
  std::size_t delta_samples = 1;

  std::string out_dir;     // empty: no files are written
  bool wall_time = true;   // false writes wall_ms = 0 for byte-stable CSVs
  unsigned workers = 0;    // 0 = default_workers()

  // Throws ArgumentError.
  void validate() const;
};

// Loads the configured dataset (probabilities for alpha = 1) or builds the
// synthetic preferential-attachment graph. Throws DatasetError.
Graph load_dataset(const ExperimentConfig& cfg);

// X for repetition `rep`: the same draw run_experiment uses.
NodeSet accessible_for_rep(const ExperimentConfig& cfg, const Graph& g,
                           std::size_t rep);

// Hex SHA-256 of a file. Throws DatasetError.
std::string sha256_file(const std::string& path);

struct CdTrace {
  std::string label;  // "cd", "stage1", "stage2"
  std::vector<double> values;
  std::vector<PairStepRecord> steps;
};

// One CSV row: a single repetition of one cell.
struct CellRun {
  std::string algorithm;
  double alpha = 0.0;
  double budget = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  std::size_t rep = 0;
  double spread = 0.0;
  double std_error = 0.0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string reason;
  std::vector<CdTrace> traces;
  std::string trace_file;
};

// Aggregate over repetitions for one (algorithm, alpha, B).
struct CellSummary {
  std::string algorithm;
  double alpha = 0.0;
  double budget = 0.0;
  double mean = 0.0;
  double std_error = 0.0;  // across repetitions
  double wall_ms = 0.0;    // mean per repetition
  std::size_t reps = 0;
  bool failed = false;
  std::string reason;
  std::vector<std::string> trace_files;
};

struct RunReport {
  std::string dataset;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t theta = 0;
  std::vector<CellRun> runs;
  std::vector<CellSummary> cells;

  const CellSummary* find(const std::string& algorithm, double alpha,
                          double budget) const;
};

// Every configured cell for every repetition. Spreads of non-adaptive
// algorithms come from independent Monte Carlo; adaptive ones are the
// realized spread in the repetition's world.
RunReport run_experiment(const ExperimentConfig& cfg, const Graph& base);

void write_csv(const RunReport& report, std::ostream& out);
void write_json(const RunReport& report, const ExperimentConfig& cfg,
                std::ostream& out);
// CSV + JSON into cfg.out_dir (trace files are written during the run).
void write_reports(const RunReport& report, const ExperimentConfig& cfg);

struct FpTrial {
  std::size_t trial;
  FpStatistics stats;
};
std::vector<FpTrial> fp_check(const Graph& g, std::size_t x_size,
                              std::size_t trials, std::uint64_t seed,
                              DegreeKind kind = DegreeKind::kTotal);

// Stage shares proportional to the average degrees of X and N(X). With an
// empty N(X) the result is (1, 0) and `warning` is set.
std::pair<double, double> budget_split_heuristic(const Graph& g,
                                                 const NodeSet& x,
                                                 std::string* warning = nullptr);

struct EstimateReport {
  double rr = 0.0;
  double mc = 0.0;
  double mc_std_error = 0.0;
  std::optional<double> exact;  // small instances only
};
// Either `seeds` or `alloc` is used (alloc when non-empty).
EstimateReport estimate_side_by_side(const Graph& g, const ProfileMap& profiles,
                                     const NodeSet& seeds,
                                     const DiscountAllocation& alloc,
                                     std::size_t theta, std::size_t mc_runs,
                                     std::uint64_t seed);

}  // namespace fpim

#endif  // FPIM_EXPERIMENT_HPP_
