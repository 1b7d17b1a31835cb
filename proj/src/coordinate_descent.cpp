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

#include "fpim/coordinate_descent.hpp"

#include <cmath>
#include <numeric>

namespace fpim {

namespace {

constexpr double kGoldenTol = 1e-6;
// A pair step moves only on a gain larger than this relative margin, which
// keeps recomputed objective values from drifting below earlier ones.
constexpr double kMoveMargin = 1e-10;

bool improves(double candidate, double incumbent) {
  return candidate > incumbent + kMoveMargin * std::max(1.0, std::abs(incumbent));
}

}  // namespace

void CDConfig::validate() const {
  if (max_iters < 1) throw ArgumentError("CD max_iters must be >= 1");
  if (grid_points < 11) throw ArgumentError("CD grid_points must be >= 11");
  if (restarts < 1) throw ArgumentError("CD restarts must be >= 1");
  if (!(convergence_tol >= 0.0)) {
    throw ArgumentError("CD convergence_tol must be >= 0");
  }
}

PairStepResult cd_pair_step(const std::function<double(double)>& q, double cu,
                            double cv, std::size_t grid_points) {
  if (grid_points < 2) throw ArgumentError("grid_points must be >= 2");
  double total = cu + cv;
  double lo = std::max(0.0, total - 1.0);
  double hi = std::min(total, 1.0);
  double current = q(cu);
  PairStepResult res{cu, cv, current, current};
  if (!(hi - lo > 1e-12)) return res;

  double best_x = cu;
  double best_v = current;
  std::size_t best_k = 0;
  double grid_best = -std::numeric_limits<double>::infinity();
  double step = (hi - lo) / static_cast<double>(grid_points - 1);
  for (std::size_t k = 0; k < grid_points; ++k) {
    double x = k + 1 == grid_points ? hi : lo + step * static_cast<double>(k);
    double v = q(x);
    if (v > grid_best) {
      grid_best = v;
      best_k = k;
    }
    if (improves(v, best_v)) {
      best_v = v;
      best_x = x;
    }
  }

  // Golden-section refinement on the two cells around the best grid point.
  double a = lo + step * static_cast<double>(best_k == 0 ? 0 : best_k - 1);
  double b = std::min(hi, lo + step * static_cast<double>(best_k + 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = q(x1), f2 = q(x2);
  while (b - a > kGoldenTol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = q(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = q(x1);
    }
  }
  double xm = 0.5 * (a + b);
  for (double x : {x1, x2, xm}) {
    double v = x == x1 ? f1 : x == x2 ? f2 : q(x);
    if (improves(v, best_v)) {
      best_v = v;
      best_x = x;
    }
  }

  res.cu = best_x;
  res.cv = std::clamp(total - best_x, 0.0, 1.0);
  res.value = best_v;
  return res;
}

double CoverageObjective::value(std::span<const double> c) {
  c_.assign(c.begin(), c.end());
  probs_.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) probs_[k] = model_.prob(k, c[k]);
  rebuild();
  return base_ * model_.scale();
}

void CoverageObjective::rebuild() {
  const std::size_t groups = model_.group_count();
  q_.assign(groups, 1.0);
  base_ = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    q_[g] = product_without(g, kNone, kNone);
    base_ += model_.weight(g) * (1.0 - q_[g]);
  }
  synced_ = true;
}

double CoverageObjective::product_without(std::size_t g, std::size_t i,
                                          std::size_t j) const {
  double r = 1.0;
  for (std::uint32_t m : model_.members(g)) {
    if (m != i && m != j) r *= 1.0 - probs_[m];
  }
  return r;
}

void CoverageObjective::sync(std::span<const double> c) {
  if (!synced_ || c_.size() != c.size()) {
    value(c);
    return;
  }
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] == c_[k]) continue;
    c_[k] = c[k];
    double p = model_.prob(k, c[k]);
    double old = 1.0 - probs_[k];
    if (p == probs_[k]) continue;
    probs_[k] = p;
    // Multiplicative update; a factor of zero forces a rescan. value()
    // rebuilds from scratch once per sweep, which bounds rounding drift.
    for (std::uint32_t g : model_.groups_of(k)) {
      double q = old > 0.0 ? q_[g] / old * (1.0 - p)
                           : product_without(g, kNone, kNone);
      base_ += model_.weight(g) * (q_[g] - q);
      q_[g] = q;
    }
  }
}

std::function<double(double)> CoverageObjective::restricted(
    std::size_t i, std::size_t j, std::span<const double> c) {
  sync(c);
  // Groups without i or j contribute their cached term to a0. The others
  // are split by whether they hold i, j or both; groups_of lists are sorted,
  // so one merge finds the shared ones.
  const double oi = 1.0 - probs_[i], oj = 1.0 - probs_[j];
  PairCoefficients pc;
  double shift = 0.0;
  auto add = [&](std::uint32_t g, unsigned mask) {
    double r;
    double div = (mask & 1 ? oi : 1.0) * (mask & 2 ? oj : 1.0);
    r = div > 0.0 ? q_[g] / div : product_without(g, i, j);
    double w = model_.weight(g);
    shift += w * (q_[g] - r);
    if (mask & 1) pc.au += w * r;
    if (mask & 2) pc.av += w * r;
    if (mask == 3) pc.auv -= w * r;
  };
  auto gi = model_.groups_of(i), gj = model_.groups_of(j);
  std::size_t a = 0, b = 0;
  while (a < gi.size() || b < gj.size()) {
    if (b == gj.size() || (a < gi.size() && gi[a] < gj[b])) {
      add(gi[a++], 1);
    } else if (a == gi.size() || gj[b] < gi[a]) {
      add(gj[b++], 2);
    } else {
      add(gi[a], 3);
      ++a;
      ++b;
    }
  }
  const double k = model_.scale();
  pc.a0 = (base_ + shift) * k;
  pc.au *= k;
  pc.av *= k;
  pc.auv *= k;
  double total = c[i] + c[j];
  const SeedProbFn& fi = model_.prob_fn(i);
  const SeedProbFn& fj = model_.prob_fn(j);
  return [pc, total, &fi, &fj](double x) {
    double y = std::clamp(total - x, 0.0, 1.0);
    return pc.evaluate(fi(x), fj(y));
  };
}

std::vector<double> initial_discounts(std::size_t size, double budget,
                                      std::span<const double> degrees,
                                      const CDConfig& cfg) {
  std::vector<double> c(size, 0.0);
  if (size == 0 || budget <= 0.0) return c;
  if (budget >= static_cast<double>(size) - kBudgetTol) {
    std::fill(c.begin(), c.end(), 1.0);
    return c;
  }
  switch (cfg.init_strategy) {
    case InitStrategy::kUniform:
      std::fill(c.begin(), c.end(), budget / static_cast<double>(size));
      break;
    case InitStrategy::kDegreeUniform: {
      if (degrees.size() != size) {
        throw ArgumentError("degree-uniform init needs one degree per user");
      }
      std::vector<std::size_t> order(size);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return degrees[a] > degrees[b];
                       });
      auto k = std::min<std::size_t>(
          size, static_cast<std::size_t>(std::ceil(1.5 * budget - 1e-12)));
      double each = std::min(1.0, budget / static_cast<double>(k));
      for (std::size_t r = 0; r < k; ++r) c[order[r]] = each;
      break;
    }
    case InitStrategy::kCustom: {
      if (cfg.custom_init.size() != size) {
        throw ArgumentError("custom init needs one discount per user");
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < size; ++k) {
        double v = cfg.custom_init[k];
        if (!(v >= 0.0 && v <= 1.0)) {
          throw ArgumentError("custom init discount outside [0,1]");
        }
        c[k] = v;
        sum += v;
      }
      if (std::abs(sum - budget) > kBudgetTol) {
        throw ArgumentError("custom init must spend exactly the budget");
      }
      break;
    }
  }
  return c;
}

namespace {

CDOutcome run_once(AllocationObjective& objective, std::vector<double> c,
                   const CDConfig& cfg, Rng& rng) {
  CDOutcome out;
  std::size_t m = c.size();
  out.trace.push_back(objective.value(c));
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t sweep = 0; sweep < cfg.max_iters && m >= 2; ++sweep) {
    shuffle(perm, rng);
    double sweep_gain = 0.0;
    double max_gain = 0.0;
    for (std::size_t k = 0; k + 1 < m; k += 2) {
      std::size_t i = perm[k], j = perm[k + 1];
      if (c[i] + c[j] <= 0.0) continue;
      if (c[i] + c[j] >= 2.0) continue;
      auto q = objective.restricted(i, j, c);
      PairStepResult r = cd_pair_step(q, c[i], c[j], cfg.grid_points);
      out.steps.push_back({i, j, r.before, r.value});
      c[i] = r.cu;
      c[j] = r.cv;
      sweep_gain += r.value - r.before;
      max_gain = std::max(max_gain, r.value - r.before);
    }
    ++out.sweeps;
    out.trace.push_back(objective.deterministic()
                            ? objective.value(c)
                            : out.trace.back() + sweep_gain);
    if (max_gain <= cfg.convergence_tol) break;
  }
  out.value = out.trace.back();
  out.discounts = std::move(c);
  return out;
}

}  // namespace

CDOutcome coordinate_descent(AllocationObjective& objective, double budget,
                             std::span<const double> degrees,
                             const CDConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!(budget >= 0.0)) throw ArgumentError("budget must be >= 0");
  std::size_t m = objective.size();
  if (m == 0) {
    if (budget > kBudgetTol) {
      throw ArgumentError("coordinate_descent: no users for positive budget");
    }
    CDOutcome out;
    out.trace.push_back(objective.value({}));
    out.value = out.trace.back();
    return out;
  }
  CDOutcome best = run_once(objective, initial_discounts(m, budget, degrees, cfg),
                            cfg, rng);
  for (std::size_t r = 1; r < cfg.restarts; ++r) {
    // Extra restarts spread the budget over a random user ranking.
    std::vector<double> keys(m);
    for (double& k : keys) k = uniform01(rng);
    CDConfig shuffled = cfg;
    shuffled.init_strategy = InitStrategy::kDegreeUniform;
    CDOutcome o = run_once(
        objective, initial_discounts(m, budget, keys, shuffled), cfg, rng);
    if (o.value > best.value) best = std::move(o);
  }
  return best;
}

AllocationResult coordinate_descent(const RRIndex& idx,
                                    const ProfileMap& profiles,
                                    const NodeSet& users,
                                    std::span<const double> degrees,
                                    double budget, const CDConfig& cfg,
                                    Rng& rng) {
  CoverageModel model(idx, users.members(), profiles);
  CoverageObjective objective(model);
  CDOutcome o = coordinate_descent(objective, budget, degrees, cfg, rng);
  AllocationResult res;
  res.allocation = DiscountAllocation(budget);
  for (std::size_t k = 0; k < o.discounts.size(); ++k) {
    res.allocation.set(users[k], o.discounts[k]);
  }
  res.value = o.value;
  res.trace = std::move(o.trace);
  res.steps = std::move(o.steps);
  res.sweeps = o.sweeps;
  return res;
}

}  // namespace fpim
