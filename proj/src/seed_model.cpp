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

#include "fpim/seed_model.hpp"

#include <cmath>
#include <numeric>

#include "json.hpp"

namespace fpim {

SeedProbFn SeedProbFn::tabulated(std::vector<double> xs,
                                 std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ArgumentError("tabulated seed probability needs >= 2 points");
  }
  if (xs.front() != 0.0 || xs.back() != 1.0 || ys.front() != 0.0 ||
      ys.back() != 1.0) {
    throw ArgumentError("tabulated seed probability must run (0,0) to (1,1)");
  }
  std::size_t k = xs.size();
  std::vector<double> delta(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (!(xs[i + 1] > xs[i]) || ys[i + 1] < ys[i]) {
      throw ArgumentError("tabulated seed probability must be monotone");
    }
    delta[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
  }
  std::vector<double> m(k);
  m[0] = delta[0];
  m[k - 1] = delta[k - 2];
  for (std::size_t i = 1; i + 1 < k; ++i) {
    m[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0
                                          : 0.5 * (delta[i - 1] + delta[i]);
  }
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (delta[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
      continue;
    }
    double a = m[i] / delta[i], b = m[i + 1] / delta[i];
    double s = a * a + b * b;
    if (s > 9.0) {
      double t = 3.0 / std::sqrt(s);
      m[i] = t * a * delta[i];
      m[i + 1] = t * b * delta[i];
    }
  }
  SeedProbFn fn(SeedProbKind::kTabulated);
  fn.table_ = std::make_shared<Table>(
      Table{std::move(xs), std::move(ys), std::move(m)});
  return fn;
}

double SeedProbFn::eval_table(double c) const {
  const Table& t = *table_;
  auto it = std::upper_bound(t.xs.begin(), t.xs.end(), c);
  std::size_t i = it == t.xs.begin() ? 0 : (it - t.xs.begin()) - 1;
  if (i + 1 >= t.xs.size()) return t.ys.back();
  double h = t.xs[i + 1] - t.xs[i];
  double s = (c - t.xs[i]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  double v = h00 * t.ys[i] + h10 * h * t.slopes[i] + h01 * t.ys[i + 1] +
             h11 * h * t.slopes[i + 1];
  return std::clamp(v, 0.0, 1.0);
}

std::string_view SeedProbFn::name() const {
  switch (kind_) {
    case SeedProbKind::kQuadraticSlow:
      return "quadratic-slow";
    case SeedProbKind::kLinear:
      return "linear";
    case SeedProbKind::kQuadraticFast:
      return "quadratic-fast";
    case SeedProbKind::kTabulated:
      return "tabulated";
  }
  return "";
}

namespace {

SeedProbKind kind_from_name(std::string_view name) {
  if (name == "quadratic-slow") return SeedProbKind::kQuadraticSlow;
  if (name == "linear") return SeedProbKind::kLinear;
  if (name == "quadratic-fast") return SeedProbKind::kQuadraticFast;
  throw ArgumentError("unknown seed probability kind: " + std::string(name));
}

std::string_view kind_name(SeedProbKind kind) {
  switch (kind) {
    case SeedProbKind::kQuadraticSlow:
      return "quadratic-slow";
    case SeedProbKind::kLinear:
      return "linear";
    case SeedProbKind::kQuadraticFast:
      return "quadratic-fast";
    case SeedProbKind::kTabulated:
      break;
  }
  throw ArgumentError("tabulated kind cannot appear in a profile mix");
}

SeedProbFn builtin(SeedProbKind kind) {
  switch (kind) {
    case SeedProbKind::kQuadraticSlow:
      return SeedProbFn::quadratic_slow();
    case SeedProbKind::kLinear:
      return SeedProbFn::linear();
    case SeedProbKind::kQuadraticFast:
      return SeedProbFn::quadratic_fast();
    case SeedProbKind::kTabulated:
      break;
  }
  throw ArgumentError("tabulated kind cannot appear in a profile mix");
}

}  // namespace

SeedProbFn SeedProbFn::from_name(std::string_view name) {
  return builtin(kind_from_name(name));
}

double eval_seed_prob(const UserProfile& profile, double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw ArgumentError("discount outside [0,1]");
  }
  return profile.prob_fn(c);
}

const SeedProbFn& ProfileMap::at(NodeId u) const {
  if (u >= fns_.size()) throw ArgumentError("no profile for node");
  return fns_[u];
}

ProfileMix::ProfileMix(std::vector<ProfileMixEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ArgumentError("empty profile mix");
  double sum = 0.0;
  for (const auto& e : entries_) {
    if (!(e.fraction >= 0.0)) throw ArgumentError("negative mix fraction");
    kind_name(e.kind);
    sum += e.fraction;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError("profile mix fractions must sum to 1");
  }
}

ProfileMix ProfileMix::setting1() {
  return ProfileMix({{0.05, SeedProbKind::kQuadraticSlow},
                     {0.10, SeedProbKind::kLinear},
                     {0.85, SeedProbKind::kQuadraticFast}});
}

ProfileMix ProfileMix::setting2() {
  return ProfileMix({{0.15, SeedProbKind::kQuadraticSlow},
                     {0.20, SeedProbKind::kLinear},
                     {0.65, SeedProbKind::kQuadraticFast}});
}

ProfileMix ProfileMix::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("profile mix: ") + e.what());
  }
  if (!j.is_array()) throw ArgumentError("profile mix must be a JSON list");
  std::vector<ProfileMixEntry> entries;
  for (const auto& item : j) {
    double fraction = 0.0;
    std::string kind;
    if (item.is_array() && item.size() == 2 && item[0].is_number() &&
        item[1].is_string()) {
      fraction = item[0].get<double>();
      kind = item[1].get<std::string>();
    } else if (item.is_object() && item.contains("fraction") &&
               item.contains("kind") && item["fraction"].is_number() &&
               item["kind"].is_string()) {
      fraction = item["fraction"].get<double>();
      kind = item["kind"].get<std::string>();
    } else {
      throw ArgumentError("profile mix entries are (fraction, kind) pairs");
    }
    entries.push_back({fraction, kind_from_name(kind)});
  }
  return ProfileMix(std::move(entries));
}

std::string ProfileMix::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries_) {
    j.push_back({{"fraction", e.fraction}, {"kind", kind_name(e.kind)}});
  }
  return j.dump();
}

ProfileMap assign_profiles(std::size_t n, const ProfileMix& mix, Rng& rng) {
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  std::vector<SeedProbFn> fns(n);
  double cum = 0.0;
  std::size_t begin = 0;
  const auto& entries = mix.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    cum += entries[k].fraction;
    std::size_t end = k + 1 == entries.size()
                          ? n
                          : std::min(n, static_cast<std::size_t>(std::llround(
                                            cum * static_cast<double>(n))));
    for (std::size_t i = begin; i < end; ++i) {
      fns[order[i]] = builtin(entries[k].kind);
    }
    begin = std::max(begin, end);
  }
  return ProfileMap(std::move(fns));
}

void DiscountAllocation::set(NodeId u, double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw ArgumentError("discount outside [0,1]");
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), u,
      [](const std::pair<NodeId, double>& e, NodeId id) { return e.first < id; });
  if (it != entries_.end() && it->first == u) {
    it->second = c;
  } else {
    entries_.insert(it, {u, c});
  }
}

double DiscountAllocation::get(NodeId u) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), u,
      [](const std::pair<NodeId, double>& e, NodeId id) { return e.first < id; });
  return it != entries_.end() && it->first == u ? it->second : 0.0;
}

bool DiscountAllocation::contains(NodeId u) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), u,
      [](const std::pair<NodeId, double>& e, NodeId id) { return e.first < id; });
  return it != entries_.end() && it->first == u;
}

double DiscountAllocation::total() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

NodeSet DiscountAllocation::users() const {
  std::vector<NodeId> ids;
  ids.reserve(entries_.size());
  for (const auto& e : entries_) ids.push_back(e.first);
  return NodeSet(std::move(ids));
}

DiscountRateSet::DiscountRateSet(std::vector<double> rates)
    : rates_(std::move(rates)) {
  std::sort(rates_.begin(), rates_.end());
  if (rates_.empty()) throw ArgumentError("empty discount rate set");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!(rates_[i] > 0.0 && rates_[i] <= 1.0)) {
      throw ArgumentError("discount rates must lie in (0,1]");
    }
    if (i > 0 && rates_[i] == rates_[i - 1]) {
      throw ArgumentError("discount rates must be distinct");
    }
  }
  if (rates_.back() != 1.0) throw ArgumentError("discount rates must include 1");
}

DiscountRateSet DiscountRateSet::uniform_grid(std::size_t k) {
  if (k == 0) throw ArgumentError("empty discount rate set");
  std::vector<double> r;
  for (std::size_t i = 1; i <= k; ++i) {
    r.push_back(static_cast<double>(i) / static_cast<double>(k));
  }
  return DiscountRateSet(std::move(r));
}

double seed_set_probability(const DiscountAllocation& alloc,
                            const ProfileMap& profiles,
                            const NodeSet& subset) {
  for (NodeId u : subset) {
    if (!alloc.contains(u)) {
      throw ArgumentError("subset member outside allocation domain");
    }
  }
  double p = 1.0;
  for (const auto& [u, c] : alloc.entries()) {
    double pu = profiles.at(u)(c);
    p *= subset.contains(u) ? pu : 1.0 - pu;
  }
  return p;
}

NodeSet sample_seed_set(const DiscountAllocation& alloc,
                        const ProfileMap& profiles, Rng& rng) {
  std::vector<NodeId> out;
  for (const auto& [u, c] : alloc.entries()) {
    // One draw per user regardless of c keeps streams aligned across
    // allocations.
    double r = uniform01(rng);
    if (r < profiles.at(u)(c)) out.push_back(u);
  }
  return NodeSet(std::move(out));
}

std::vector<Action> action_space(const NodeSet& users,
                                 const DiscountRateSet& rates) {
  std::vector<Action> out;
  out.reserve(users.size() * rates.size());
  for (NodeId u : users) {
    for (double d : rates.rates()) out.push_back({u, d});
  }
  return out;
}

}  // namespace fpim
