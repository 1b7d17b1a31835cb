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

#include "fpim/oracle.hpp"

#include <bit>
#include <cmath>
#include <map>

namespace fpim {

namespace {

void check_instance(const ExactInstance& inst) {
  if (inst.graph.node_count() > kMaxExactNodes) {
    throw CapacityError("exact oracle: too many nodes");
  }
  if (inst.graph.edge_count() > kMaxExactEdges) {
    throw CapacityError("exact oracle: too many edges");
  }
}

// Calls fn(weight, reach) for every edge-state realization with nonzero
// weight; reach[v] is the bitmask of nodes reachable from v (v included).
// Edges with p in {0, 1} are fixed, the rest enumerated.
template <class Fn>
void for_each_realization(const ExactInstance& inst, Fn&& fn) {
  check_instance(inst);
  const Graph& g = inst.graph;
  std::size_t n = g.node_count();
  std::vector<std::size_t> uncertain;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    double p = g.edge(e).prob;
    if (p > 0.0 && p < 1.0) uncertain.push_back(e);
  }
  std::vector<std::uint8_t> live(g.edge_count(), 0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    live[e] = g.edge(e).prob >= 1.0 ? 1 : 0;
  }
  std::vector<std::uint64_t> reach(n);
  std::vector<NodeId> stack;
  const std::uint64_t states = std::uint64_t{1} << uncertain.size();
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    double w = 1.0;
    for (std::size_t b = 0; b < uncertain.size(); ++b) {
      std::size_t e = uncertain[b];
      bool on = (mask >> b) & 1;
      live[e] = on;
      w *= on ? g.edge(e).prob : 1.0 - g.edge(e).prob;
    }
    for (NodeId s = 0; s < n; ++s) {
      std::uint64_t seen = std::uint64_t{1} << s;
      stack.assign(1, s);
      while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (std::uint32_t e : g.out_edges(v)) {
          NodeId t = g.edge(e).target;
          if (live[e] && !((seen >> t) & 1)) {
            seen |= std::uint64_t{1} << t;
            stack.push_back(t);
          }
        }
      }
      reach[s] = seen;
    }
    fn(w, reach);
  }
}

}  // namespace

double exact_influence(const ExactInstance& inst, const NodeSet& seeds) {
  seeds.check_range(inst.graph.node_count(), "exact_influence");
  if (seeds.empty()) {
    check_instance(inst);
    return 0.0;
  }
  double total = 0.0;
  for_each_realization(inst, [&](double w, const std::vector<std::uint64_t>& reach) {
    std::uint64_t m = 0;
    for (NodeId s : seeds) m |= reach[s];
    total += w * std::popcount(m);
  });
  return total;
}

std::vector<double> exact_influence_table(const ExactInstance& inst,
                                          std::span<const NodeId> users) {
  if (users.size() > 20) throw CapacityError("exact oracle: too many users");
  for (NodeId u : users) {
    if (u >= inst.graph.node_count()) throw ArgumentError("user out of range");
  }
  std::size_t k = users.size();
  std::vector<double> table(std::size_t{1} << k, 0.0);
  std::vector<std::uint64_t> cover(table.size(), 0);
  for_each_realization(inst, [&](double w, const std::vector<std::uint64_t>& reach) {
    for (std::size_t mask = 1; mask < table.size(); ++mask) {
      std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
      cover[mask] = cover[mask & (mask - 1)] | reach[users[low]];
      table[mask] += w * std::popcount(cover[mask]);
    }
  });
  return table;
}

double exact_Q_from_table(std::span<const double> table,
                          std::span<const double> probs) {
  std::size_t k = probs.size();
  if (table.size() != (std::size_t{1} << k)) {
    throw ArgumentError("influence table does not match users");
  }
  double q = 0.0;
  for (std::size_t mask = 1; mask < table.size(); ++mask) {
    double p = 1.0;
    for (std::size_t b = 0; b < k && p != 0.0; ++b) {
      p *= (mask >> b) & 1 ? probs[b] : 1.0 - probs[b];
    }
    q += p * table[mask];
  }
  return q;
}

double exact_Q(const ExactInstance& inst, const DiscountAllocation& alloc) {
  std::vector<NodeId> users;
  std::vector<double> probs;
  for (const auto& [u, c] : alloc.entries()) {
    double p = inst.profiles.at(u)(c);
    if (p > 0.0) {
      users.push_back(u);
      probs.push_back(p);
    }
  }
  if (users.empty()) {
    check_instance(inst);
    return 0.0;
  }
  return exact_Q_from_table(exact_influence_table(inst, users), probs);
}

std::pair<DiscountAllocation, double> brute_force_best_alloc(
    const ExactInstance& inst, const NodeSet& users, double budget,
    std::size_t grid) {
  if (grid == 0) throw ArgumentError("grid must be >= 1");
  if (!(budget >= 0.0)) throw ArgumentError("budget must be >= 0");
  std::size_t k = users.size();
  DiscountAllocation best(budget);
  if (k == 0) return {best, 0.0};
  std::vector<double> table = exact_influence_table(inst, users.members());
  double spend = std::min(budget, static_cast<double>(k));
  auto units = static_cast<std::size_t>(
      std::floor(spend * static_cast<double>(grid) + 1e-9));

  std::vector<std::size_t> parts(k, 0);
  std::vector<double> probs(k, 0.0);
  std::vector<std::size_t> best_parts(k, 0);
  double best_q = -1.0;
  double step = 1.0 / static_cast<double>(grid);
  // Compositions of `units` into k parts of at most `grid`.
  auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == k) {
      if (left > grid) return;
      parts[i] = left;
      for (std::size_t b = 0; b < k; ++b) {
        probs[b] = inst.profiles.at(users[b])(static_cast<double>(parts[b]) * step);
      }
      double q = exact_Q_from_table(table, probs);
      if (q > best_q) {
        best_q = q;
        best_parts = parts;
      }
      return;
    }
    std::size_t rest_cap = (k - i - 1) * grid;
    std::size_t lo = left > rest_cap ? left - rest_cap : 0;
    for (std::size_t v = lo; v <= std::min(left, grid); ++v) {
      parts[i] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, units);
  for (std::size_t b = 0; b < k; ++b) {
    best.set(users[b], std::min(1.0, static_cast<double>(best_parts[b]) * step));
  }
  return {best, best_q};
}

double exact_f(const ExactInstance& inst, const DiscountAllocation& c1,
               const NodeSet& x, double b2, std::size_t grid) {
  std::vector<NodeId> xs;
  std::vector<double> probs;
  for (const auto& [u, c] : c1.entries()) {
    if (!x.contains(u)) throw ArgumentError("stage-1 discount outside X");
    double p = inst.profiles.at(u)(c);
    if (p > 0.0) {
      xs.push_back(u);
      probs.push_back(p);
    }
  }
  if (xs.size() > 20) throw CapacityError("exact_f: too many agents");
  std::map<std::vector<NodeId>, double> memo;
  double f = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << xs.size()); ++mask) {
    double p = 1.0;
    std::vector<NodeId> agents;
    for (std::size_t b = 0; b < xs.size(); ++b) {
      if ((mask >> b) & 1) {
        p *= probs[b];
        agents.push_back(xs[b]);
      } else {
        p *= 1.0 - probs[b];
      }
    }
    if (p == 0.0) continue;
    NodeSet cands = set_difference(neighborhood(inst.graph, NodeSet(agents)), x);
    auto it = memo.find(cands.members());
    if (it == memo.end()) {
      double m = brute_force_best_alloc(inst, cands, b2, grid).second;
      it = memo.emplace(cands.members(), m).first;
    }
    f += p * it->second;
  }
  return f;
}

std::pair<NodeSet, double> brute_force_best_seeds(const ExactInstance& inst,
                                                  std::size_t k) {
  std::size_t n = inst.graph.node_count();
  std::vector<std::uint64_t> subsets;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) <= k) subsets.push_back(mask);
  }
  std::vector<double> value(subsets.size(), 0.0);
  for_each_realization(inst, [&](double w, const std::vector<std::uint64_t>& reach) {
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      std::uint64_t m = 0;
      for (std::uint64_t rest = subsets[s]; rest != 0; rest &= rest - 1) {
        m |= reach[static_cast<std::size_t>(std::countr_zero(rest))];
      }
      value[s] += w * std::popcount(m);
    }
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < subsets.size(); ++s) {
    if (value[s] > value[best]) best = s;
  }
  std::vector<NodeId> ids;
  for (std::uint64_t rest = subsets[best]; rest != 0; rest &= rest - 1) {
    ids.push_back(static_cast<NodeId>(std::countr_zero(rest)));
  }
  return {NodeSet(std::move(ids)), value[best]};
}

ExactActionEvaluator::ExactActionEvaluator(const ExactInstance& inst,
                                           const NodeSet& users)
    : users_(users),
      table_(exact_influence_table(inst, users.members())),
      probs_(users.size(), 0.0) {
  for (NodeId u : users_) fns_.push_back(inst.profiles.at(u));
}

double ExactActionEvaluator::gain(const LocalAction& a) const {
  auto probs = probs_;
  probs[a.user] = fns_[a.user](a.discount);
  return exact_Q_from_table(table_, probs) - value_;
}

void ExactActionEvaluator::push(const LocalAction& a) {
  stack_.push_back({a.user, probs_[a.user]});
  values_.push_back(value_);
  probs_[a.user] = fns_[a.user](a.discount);
  value_ = eval();
}

void ExactActionEvaluator::pop() {
  probs_[stack_.back().first] = stack_.back().second;
  stack_.pop_back();
  value_ = values_.back();
  values_.pop_back();
}

std::pair<std::vector<LocalAction>, double> brute_force_best_actions(
    ExactActionEvaluator& eval, std::span<const double> rates, double budget) {
  std::vector<LocalAction> current, best;
  double best_v = -1.0;
  auto rec = [&](auto&& self, std::uint32_t u, double spent) -> void {
    if (u == eval.size()) {
      if (eval.value() > best_v) {
        best_v = eval.value();
        best = current;
      }
      return;
    }
    self(self, u + 1, spent);
    for (double d : rates) {
      if (spent + d > budget + kBudgetTol) continue;
      eval.push({u, d});
      current.push_back({u, d});
      self(self, u + 1, spent + d);
      current.pop_back();
      eval.pop();
    }
  };
  rec(rec, 0, 0.0);
  return {best, best_v};
}

}  // namespace fpim
