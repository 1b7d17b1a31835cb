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

#ifndef FPIM_STAGE2_SELECT_HPP_
#define FPIM_STAGE2_SELECT_HPP_

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/rr_index.hpp"

namespace fpim {

// Action on a candidate addressed by its position in the candidate list.
struct LocalAction {
  std::uint32_t user;
  double discount;
  friend bool operator==(const LocalAction&, const LocalAction&) = default;
};

// Incremental set-function evaluator over actions. gain() is
// Q(L + a) - Q(L) for the current set L; push/pop edit L as a stack.
template <class E>
concept ActionEvaluator = requires(E& e, const E& ce, const LocalAction& a) {
  { ce.value() } -> std::convertible_to<double>;
  { ce.gain(a) } -> std::convertible_to<double>;
  e.push(a);
  e.pop();
};

// Coverage estimate of an action set: candidate u seeded with probability
// p_u(d) for its single action (u, d).
class CoverageActionEvaluator {
 public:
  explicit CoverageActionEvaluator(const CoverageModel& model)
      : model_(model), prod_(model.group_count(), 1.0) {}

  double value() const { return value_; }
  double gain(const LocalAction& a) const {
    double p = model_.prob(a.user, a.discount);
    if (p == 0.0) return 0.0;
    double s = 0.0;
    for (std::uint32_t g : model_.groups_of(a.user)) {
      s += model_.weight(g) * prod_[g];
    }
    return p * s * model_.scale();
  }
  void push(const LocalAction& a) {
    double p = model_.prob(a.user, a.discount);
    frames_.push_back({undo_.size(), value_});
    value_ += gain(a);
    for (std::uint32_t g : model_.groups_of(a.user)) {
      undo_.push_back({g, prod_[g]});
      prod_[g] *= 1.0 - p;
    }
  }
  void pop() {
    Frame f = frames_.back();
    frames_.pop_back();
    while (undo_.size() > f.undo_size) {
      prod_[undo_.back().first] = undo_.back().second;
      undo_.pop_back();
    }
    value_ = f.value;
  }

 private:
  struct Frame {
    std::size_t undo_size;
    double value;
  };
  const CoverageModel& model_;
  std::vector<double> prod_;
  std::vector<std::pair<std::uint32_t, double>> undo_;
  std::vector<Frame> frames_;
  double value_ = 0.0;
};

struct SelectionResult {
  std::vector<LocalAction> actions;
  double value = 0.0;
};

namespace detail {

// Argmax order: larger ratio, then larger gain, then smaller discount, then
// lower user.
inline bool ranks_before(double ratio_a, double gain_a, const LocalAction& a,
                         double ratio_b, double gain_b, const LocalAction& b) {
  if (ratio_a != ratio_b) return ratio_a > ratio_b;
  if (gain_a != gain_b) return gain_a > gain_b;
  if (a.discount != b.discount) return a.discount < b.discount;
  return a.user < b.user;
}

// Greedy by marginal gain per unit cost over the actions of z flagged in
// `alive`, starting from the evaluator's current set. An action that does
// not fit is dropped; a chosen action drops every other action on its user.
// Lazy re-evaluation relies on gains only shrinking as the set grows.
// `bounds`, when given, holds upper bounds on the current gains and seeds
// the heap as stale entries. Returns the number of pushed actions.
template <ActionEvaluator E>
std::size_t greedy_extend(E& eval, std::span<const LocalAction> z,
                          std::vector<std::uint8_t>& user_taken,
                          double budget, double& spent,
                          std::vector<LocalAction>& chosen,
                          const double* bounds = nullptr) {
  struct Entry {
    double ratio;
    double gain;
    std::uint32_t k;
    std::size_t version;
  };
  auto after = [&](const Entry& a, const Entry& b) {
    return ranks_before(b.ratio, b.gain, z[b.k], a.ratio, a.gain, z[a.k]);
  };
  std::vector<Entry> store;
  store.reserve(z.size());
  constexpr std::size_t kStale = std::numeric_limits<std::size_t>::max();
  for (std::uint32_t k = 0; k < z.size(); ++k) {
    if (user_taken[z[k].user]) continue;
    double g = bounds ? bounds[k] : eval.gain(z[k]);
    store.push_back({g / z[k].discount, g, k, bounds ? kStale : 0});
  }
  std::priority_queue<Entry, std::vector<Entry>, decltype(after)> heap(
      after, std::move(store));
  std::size_t version = 0;
  std::size_t pushed = 0;
  while (!heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    const LocalAction& a = z[top.k];
    if (user_taken[a.user]) continue;
    if (top.version != version) {
      double g = eval.gain(a);
      heap.push({g / a.discount, g, top.k, version});
      continue;
    }
    if (spent + a.discount <= budget + kBudgetTol) {
      eval.push(a);
      chosen.push_back(a);
      user_taken[a.user] = 1;
      spent += a.discount;
      ++pushed;
      ++version;
    }
  }
  return pushed;
}

// Fractional knapsack over per-action gain bounds: an upper bound on what
// any set of further actions spending at most w can add, given that each
// action's gain is at most gains[k]. Actions on `skip_a`/`skip_b` users and
// nonpositive gains are left out.
class KnapsackBound {
 public:
  void build(std::span<const LocalAction> z, std::span<const double> gains,
             std::uint32_t skip_a, std::uint32_t skip_b) {
    order_.clear();
    for (std::uint32_t k = 0; k < z.size(); ++k) {
      if (z[k].user == skip_a || z[k].user == skip_b || gains[k] <= 0.0) {
        continue;
      }
      order_.push_back(k);
    }
    std::sort(order_.begin(), order_.end(), [&](std::uint32_t x, std::uint32_t y) {
      return gains[x] * z[y].discount > gains[y] * z[x].discount;
    });
    cost_.assign(1, 0.0);
    gain_.assign(1, 0.0);
    ratio_.clear();
    for (std::uint32_t k : order_) {
      cost_.push_back(cost_.back() + z[k].discount);
      gain_.push_back(gain_.back() + gains[k]);
      ratio_.push_back(gains[k] / z[k].discount);
    }
  }
  double operator()(double w) const {
    if (w <= 0.0) return 0.0;
    auto k = static_cast<std::size_t>(
        std::upper_bound(cost_.begin(), cost_.end(), w) - cost_.begin() - 1);
    if (k + 1 >= cost_.size()) return gain_.back();
    return gain_[k] + (w - cost_[k]) * ratio_[k];
  }

 private:
  std::vector<std::uint32_t> order_;
  std::vector<double> cost_, gain_, ratio_;
};

inline std::size_t user_bound(std::span<const LocalAction> z) {
  std::size_t n = 0;
  for (const auto& a : z) n = std::max<std::size_t>(n, a.user + 1);
  return n;
}

}  // namespace detail

// Greedy selection: S1 by marginal gain per cost, S2 the best single
// feasible action; returns the better (S1 on ties). The evaluator must hold
// the empty set and is restored to it.
template <ActionEvaluator E>
SelectionResult greedy_selection(E& eval, std::span<const LocalAction> z,
                                 double budget) {
  SelectionResult s2;
  bool have_s2 = false;
  double best_gain = 0.0;
  for (const auto& a : z) {
    if (a.discount > budget + kBudgetTol) continue;
    double g = eval.gain(a);
    if (!have_s2 || detail::ranks_before(g, g, a, best_gain, best_gain,
                                         s2.actions.front())) {
      s2.actions = {a};
      s2.value = g;
      best_gain = g;
      have_s2 = true;
    }
  }
  std::vector<std::uint8_t> taken(detail::user_bound(z), 0);
  double spent = 0.0;
  SelectionResult s1;
  std::size_t pushed =
      detail::greedy_extend(eval, z, taken, budget, spent, s1.actions);
  s1.value = eval.value();
  for (std::size_t k = 0; k < pushed; ++k) eval.pop();
  if (!have_s2 || s1.value >= s2.value) return s1;
  return s2;
}

// Modified greedy: S2 the best feasible set of fewer than three actions by
// enumeration; every feasible triple is greedily extended; returns the best
// candidate (extended triples win ties). Evaluator as for greedy_selection.
template <ActionEvaluator E>
SelectionResult modified_greedy(E& eval, std::span<const LocalAction> z,
                                double budget) {
  const std::size_t m = z.size();
  auto fits = [&](double cost) { return cost <= budget + kBudgetTol; };

  SelectionResult s2;  // the empty set
  for (std::size_t a = 0; a < m; ++a) {
    if (!fits(z[a].discount)) continue;
    eval.push(z[a]);
    if (eval.value() > s2.value) s2 = {{z[a]}, eval.value()};
    for (std::size_t b = a + 1; b < m; ++b) {
      if (z[b].user == z[a].user || !fits(z[a].discount + z[b].discount)) {
        continue;
      }
      double v = eval.value() + eval.gain(z[b]);
      if (v > s2.value) s2 = {{z[a], z[b]}, v};
    }
    eval.pop();
  }

  SelectionResult s1;
  bool have_s1 = false;
  std::vector<std::uint8_t> taken(detail::user_bound(z), 0);
  std::vector<LocalAction> chosen;
  std::vector<double> first_gain(m, 0.0);
  std::vector<double> pair_gain(m, 0.0);
  detail::KnapsackBound after_a, after_ab;
  constexpr auto kNoUser = std::numeric_limits<std::uint32_t>::max();
  // Gains only shrink as the set grows, so whatever a completion of {a, ...}
  // adds is bounded by a fractional knapsack over the gains given {a}, or
  // given {a, b} once those are known. Triples that cannot beat the
  // incumbent are skipped.
  auto beaten = [&](double bound) {
    return have_s1 && bound < s1.value - 1e-9 * std::max(1.0, s1.value);
  };
  for (std::size_t a = 0; a < m; ++a) {
    if (!fits(z[a].discount)) continue;
    eval.push(z[a]);
    const double v_a = eval.value();
    for (std::size_t x = 0; x < m; ++x) {
      first_gain[x] = z[x].user == z[a].user ? 0.0 : eval.gain(z[x]);
    }
    eval.pop();
    after_a.build(z, first_gain, z[a].user, kNoUser);
    if (beaten(v_a + after_a(budget - z[a].discount))) continue;
    for (std::size_t b = a + 1; b < m; ++b) {
      const double cost_ab = z[a].discount + z[b].discount;
      if (z[b].user == z[a].user || !fits(cost_ab)) continue;
      if (beaten(v_a + first_gain[b] + after_a(budget - cost_ab))) continue;
      eval.push(z[a]);
      eval.push(z[b]);
      for (std::size_t x = 0; x < m; ++x) {
        bool own = z[x].user == z[a].user || z[x].user == z[b].user;
        pair_gain[x] = own ? 0.0 : eval.gain(z[x]);
      }
      const double v_pair = eval.value();
      eval.pop();
      eval.pop();
      after_ab.build(z, pair_gain, z[a].user, z[b].user);
      if (beaten(v_pair + after_ab(budget - cost_ab))) continue;
      for (std::size_t c = b + 1; c < m; ++c) {
        double cost = cost_ab + z[c].discount;
        if (z[c].user == z[a].user || z[c].user == z[b].user || !fits(cost)) {
          continue;
        }
        if (beaten(v_pair + pair_gain[c] + after_ab(budget - cost))) continue;
        chosen.assign({z[a], z[b], z[c]});
        for (const auto& t : chosen) {
          eval.push(t);
          taken[t.user] = 1;
        }
        double spent = cost;
        std::size_t pushed =
            3 + detail::greedy_extend(eval, z, taken, budget, spent, chosen,
                                      pair_gain.data());
        double v = eval.value();
        if (!have_s1 || v > s1.value) {
          s1 = {chosen, v};
          have_s1 = true;
        }
        for (const auto& t : chosen) taken[t.user] = 0;
        for (std::size_t k = 0; k < pushed; ++k) eval.pop();
      }
    }
  }
  if (have_s1 && s1.value >= s2.value) return s1;
  return s2;
}

}  // namespace fpim

#endif  // FPIM_STAGE2_SELECT_HPP_
