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

#ifndef FPIM_COORDINATE_DESCENT_HPP_
#define FPIM_COORDINATE_DESCENT_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/random.hpp"
#include "fpim/rr_index.hpp"
#include "fpim/seed_model.hpp"

namespace fpim {

enum class InitStrategy { kDegreeUniform, kUniform, kCustom };

struct CDConfig {
  std::size_t max_iters = 50;  // sweeps
  InitStrategy init_strategy = InitStrategy::kDegreeUniform;
  std::size_t grid_points = 201;
  double convergence_tol = 1e-9;
  std::size_t restarts = 1;
  std::vector<double> custom_init;  // per position, for kCustom

  void validate() const;
};

struct PairStepResult {
  double cu;
  double cv;
  double value;
  double before;  // q at the incoming point
};

// Maximizes q(c_u) with c_v = B' - c_u over [max(0, B'-1), min(B', 1)]:
// grid scan, then golden-section refinement around the best grid cell. The
// current point is always a candidate, so value >= q(cu).
PairStepResult cd_pair_step(const std::function<double(double)>& q, double cu,
                            double cv, std::size_t grid_points = 201);

// Objective over a fixed list of users addressed by position.
class AllocationObjective {
 public:
  virtual ~AllocationObjective() = default;
  virtual std::size_t size() const = 0;
  virtual double value(std::span<const double> c) = 0;
  // q(c_i) with c_j = (c_i + c_j) - c_i and everything else fixed.
  virtual std::function<double(double)> restricted(
      std::size_t i, std::size_t j, std::span<const double> c) = 0;
  // False when value() is itself a noisy estimate.
  virtual bool deterministic() const { return true; }
};

// Estimated influence of a probabilistic allocation over candidates.
class CoverageObjective : public AllocationObjective {
 public:
  explicit CoverageObjective(const CoverageModel& model) : model_(model) {}
  std::size_t size() const override { return model_.size(); }
  double value(std::span<const double> c) override;
  std::function<double(double)> restricted(std::size_t i, std::size_t j,
                                           std::span<const double> c) override;

 private:
  // Brings c_, probs_, the per-group products q_ and base_ = sum w (1 - q)
  // in line with c, touching only the groups of changed users.
  void sync(std::span<const double> c);
  void rebuild();
  double product_without(std::size_t g, std::size_t i, std::size_t j) const;

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const CoverageModel& model_;
  std::vector<double> c_;
  std::vector<double> probs_;
  std::vector<double> q_;
  double base_ = 0.0;
  bool synced_ = false;
};

struct PairStepRecord {
  std::size_t i;
  std::size_t j;
  double before;
  double after;
};

struct CDOutcome {
  std::vector<double> discounts;  // by position
  double value = 0.0;
  // trace[0] is the start value; trace[k] the value after sweep k. For
  // noisy objectives, trace[k] = trace[k-1] + the per-step gains of sweep
  // k, each measured with one set of common random numbers.
  std::vector<double> trace;
  std::vector<PairStepRecord> steps;
  std::size_t sweeps = 0;
};

// degrees: per-position ranking key for kDegreeUniform (ignored otherwise).
CDOutcome coordinate_descent(AllocationObjective& objective, double budget,
                             std::span<const double> degrees,
                             const CDConfig& cfg, Rng& rng);

// Initial discounts under cfg.init_strategy; sums to min(budget, size).
std::vector<double> initial_discounts(std::size_t size, double budget,
                                      std::span<const double> degrees,
                                      const CDConfig& cfg);

// CD over `users` with the coverage estimate as objective.
struct AllocationResult {
  DiscountAllocation allocation;
  double value = 0.0;
  std::vector<double> trace;
  std::vector<PairStepRecord> steps;
  std::size_t sweeps = 0;
};
AllocationResult coordinate_descent(const RRIndex& idx,
                                    const ProfileMap& profiles,
                                    const NodeSet& users,
                                    std::span<const double> degrees,
                                    double budget, const CDConfig& cfg,
                                    Rng& rng);

}  // namespace fpim

#endif  // FPIM_COORDINATE_DESCENT_HPP_
