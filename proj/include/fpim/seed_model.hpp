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

#ifndef FPIM_SEED_MODEL_HPP_
#define FPIM_SEED_MODEL_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/random.hpp"

namespace fpim {

enum class SeedProbKind { kQuadraticSlow, kLinear, kQuadraticFast, kTabulated };

// Probability that a user accepts discount c.
class SeedProbFn {
 public:
  SeedProbFn() = default;  // linear
  static SeedProbFn quadratic_slow() { return SeedProbFn(SeedProbKind::kQuadraticSlow); }
  static SeedProbFn linear() { return SeedProbFn(SeedProbKind::kLinear); }
  static SeedProbFn quadratic_fast() { return SeedProbFn(SeedProbKind::kQuadraticFast); }
  // Monotone C1 interpolation (Fritsch-Carlson) through (xs, ys). Requires
  // xs strictly increasing from 0 to 1 and ys nondecreasing from 0 to 1.
  static SeedProbFn tabulated(std::vector<double> xs, std::vector<double> ys);
  // "quadratic-slow", "linear", "quadratic-fast".
  static SeedProbFn from_name(std::string_view name);

  SeedProbKind kind() const { return kind_; }
  std::string_view name() const;

  // Unchecked; c must lie in [0,1].
  double operator()(double c) const {
    switch (kind_) {
      case SeedProbKind::kQuadraticSlow:
        return c * c;
      case SeedProbKind::kLinear:
        return c;
      case SeedProbKind::kQuadraticFast:
        return c * (2.0 - c);
      case SeedProbKind::kTabulated:
        return eval_table(c);
    }
    return 0.0;
  }

 private:
  struct Table {
    std::vector<double> xs, ys, slopes;
  };
  explicit SeedProbFn(SeedProbKind kind) : kind_(kind) {}
  double eval_table(double c) const;

  SeedProbKind kind_ = SeedProbKind::kLinear;
  std::shared_ptr<const Table> table_;
};

struct UserProfile {
  NodeId user;
  SeedProbFn prob_fn;
};

// Checked evaluation: c outside [0,1] is an ArgumentError.
double eval_seed_prob(const UserProfile& profile, double c);

// One profile per node of a graph.
class ProfileMap {
 public:
  ProfileMap() = default;
  explicit ProfileMap(std::vector<SeedProbFn> fns) : fns_(std::move(fns)) {}
  static ProfileMap uniform(std::size_t n, SeedProbFn fn) {
    return ProfileMap(std::vector<SeedProbFn>(n, fn));
  }

  std::size_t size() const { return fns_.size(); }
  const SeedProbFn& operator[](NodeId u) const { return fns_[u]; }
  const SeedProbFn& at(NodeId u) const;
  void set(NodeId u, SeedProbFn fn) { fns_.at(u) = std::move(fn); }

 private:
  std::vector<SeedProbFn> fns_;
};

struct ProfileMixEntry {
  double fraction;
  SeedProbKind kind;
};

// Fractions of users per built-in kind; must sum to 1 within 1e-9.
class ProfileMix {
 public:
  explicit ProfileMix(std::vector<ProfileMixEntry> entries);
  static ProfileMix setting1();  // 5% slow, 10% linear, 85% fast
  static ProfileMix setting2();  // 15% slow, 20% linear, 65% fast
  // JSON list of {"fraction": f, "kind": name}.
  static ProfileMix from_json(std::string_view text);
  std::string to_json() const;

  const std::vector<ProfileMixEntry>& entries() const { return entries_; }

 private:
  std::vector<ProfileMixEntry> entries_;
};

// Shuffles the users and hands out kinds in entry order by rounded
// cumulative fraction.
ProfileMap assign_profiles(std::size_t n, const ProfileMix& mix, Rng& rng);

// user -> discount in [0,1], plus the budget it was built for.
class DiscountAllocation {
 public:
  DiscountAllocation() = default;
  explicit DiscountAllocation(double budget) : budget_(budget) {}

  // Inserts or overwrites; throws if c is outside [0,1].
  void set(NodeId u, double c);
  double get(NodeId u) const;
  bool contains(NodeId u) const;

  double budget() const { return budget_; }
  void set_budget(double b) { budget_ = b; }
  double total() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::pair<NodeId, double>>& entries() const {
    return entries_;
  }
  NodeSet users() const;

  bool within_budget() const { return total() <= budget_ + kBudgetTol; }

  friend bool operator==(const DiscountAllocation&,
                         const DiscountAllocation&) = default;

 private:
  std::vector<std::pair<NodeId, double>> entries_;  // sorted by user
  double budget_ = 0.0;
};

class DiscountRateSet {
 public:
  // Sorts; requires values in (0,1], strictly increasing, max == 1.
  explicit DiscountRateSet(std::vector<double> rates);
  // {step, 2*step, ..., 1} for step = 1/k.
  static DiscountRateSet uniform_grid(std::size_t k);

  const std::vector<double>& rates() const { return rates_; }
  std::size_t size() const { return rates_.size(); }
  double min() const { return rates_.front(); }

 private:
  std::vector<double> rates_;
};

struct Action {
  NodeId user;
  double discount;
  friend bool operator==(const Action&, const Action&) = default;
};

double seed_set_probability(const DiscountAllocation& alloc,
                            const ProfileMap& profiles, const NodeSet& subset);
NodeSet sample_seed_set(const DiscountAllocation& alloc,
                        const ProfileMap& profiles, Rng& rng);
std::vector<Action> action_space(const NodeSet& users,
                                 const DiscountRateSet& rates);

}  // namespace fpim

#endif  // FPIM_SEED_MODEL_HPP_
