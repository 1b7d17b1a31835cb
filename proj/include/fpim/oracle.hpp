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

#ifndef FPIM_ORACLE_HPP_
#define FPIM_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/graph.hpp"
#include "fpim/seed_model.hpp"
#include "fpim/stage2_select.hpp"

namespace fpim {

// Brute-force ground truth over all 2^|E| edge states. Test-facing only.
inline constexpr std::size_t kMaxExactEdges = 20;
inline constexpr std::size_t kMaxExactNodes = 64;

struct ExactInstance {
  Graph graph;
  ProfileMap profiles;
};

double exact_influence(const ExactInstance& inst, const NodeSet& seeds);

// table[mask] = exact I(T) for T = {users[b] : bit b of mask}.
std::vector<double> exact_influence_table(const ExactInstance& inst,
                                          std::span<const NodeId> users);

double exact_Q(const ExactInstance& inst, const DiscountAllocation& alloc);

// Q for per-user seeding probabilities given an influence table over the
// same users.
double exact_Q_from_table(std::span<const double> table,
                          std::span<const double> probs);

// Outer sum over agent sets S of X; inner max by brute_force_best_alloc over
// N(S) \ X with budget b2.
double exact_f(const ExactInstance& inst, const DiscountAllocation& c1,
               const NodeSet& x, double b2, std::size_t grid = 20);

std::pair<NodeSet, double> brute_force_best_seeds(const ExactInstance& inst,
                                                  std::size_t k);

// Grid search over the simplex sum(c) = min(budget, |users|) in steps of
// 1/grid.
std::pair<DiscountAllocation, double> brute_force_best_alloc(
    const ExactInstance& inst, const NodeSet& users, double budget,
    std::size_t grid = 20);

// Exact Q of an action set over candidate users (one action per user).
class ExactActionEvaluator {
 public:
  ExactActionEvaluator(const ExactInstance& inst, const NodeSet& users);

  double value() const { return value_; }
  double gain(const LocalAction& a) const;
  void push(const LocalAction& a);
  void pop();

  std::size_t size() const { return users_.size(); }
  NodeId user(std::size_t i) const { return users_[i]; }

 private:
  double eval() const {
    return exact_Q_from_table(table_, probs_);
  }
  NodeSet users_;
  std::vector<SeedProbFn> fns_;
  std::vector<double> table_;
  std::vector<double> probs_;
  std::vector<std::pair<std::uint32_t, double>> stack_;
  std::vector<double> values_;
  double value_ = 0.0;
};

// Exhaustive optimum over action sets with at most one action per user and
// total discount within budget.
std::pair<std::vector<LocalAction>, double> brute_force_best_actions(
    ExactActionEvaluator& eval, std::span<const double> rates, double budget);

}  // namespace fpim

#endif  // FPIM_ORACLE_HPP_
