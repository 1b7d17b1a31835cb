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

#ifndef FPIM_RR_INDEX_HPP_
#define FPIM_RR_INDEX_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/graph.hpp"
#include "fpim/seed_model.hpp"

namespace fpim {

// Reverse-reachable sets plus the inverted node -> set index.
//
// An index built on a residual graph keeps the id mapping, and every query
// takes original node ids. Nodes outside the residual graph are in no set.
class RRIndex {
 public:
  RRIndex() = default;
  // Builds from explicit sets over nodes [0, n). `roots` may be empty.
  RRIndex(std::size_t n, const std::vector<std::vector<NodeId>>& sets,
          std::vector<NodeId> roots = {}, std::uint64_t seed = 0);

  std::size_t theta() const { return set_offsets_.size() - 1; }
  // Nodes of the graph the sets were sampled from.
  std::size_t node_count() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  double scale() const {
    return theta() == 0 ? 0.0
                        : static_cast<double>(n_) / static_cast<double>(theta());
  }

  // Members as local ids (identical to original ids without a mapping).
  std::span<const NodeId> set(std::size_t i) const {
    return {members_.data() + set_offsets_[i],
            members_.data() + set_offsets_[i + 1]};
  }
  bool has_roots() const { return !roots_.empty(); }
  NodeId root(std::size_t i) const { return roots_[i]; }

  NodeId to_local(NodeId original) const {
    if (to_local_.empty()) return original < n_ ? original : kNoNode;
    return original < to_local_.size() ? to_local_[original] : kNoNode;
  }
  NodeId to_original(NodeId local) const {
    return to_original_.empty() ? local : to_original_[local];
  }

  // Sets containing an original node id (empty if unknown).
  std::span<const std::uint32_t> sets_containing(NodeId original) const {
    NodeId l = to_local(original);
    if (l == kNoNode) return {};
    return {inv_sets_.data() + inv_offsets_[l],
            inv_sets_.data() + inv_offsets_[l + 1]};
  }

  // Binary cache: "FPRR", version, n, theta, seed, then per set a u32 length
  // followed by u32 member ids; all little-endian. Roots and id maps are not
  // stored.
  void save(std::ostream& out) const;
  static RRIndex load(std::istream& in);

  friend bool operator==(const RRIndex& a, const RRIndex& b) {
    return a.n_ == b.n_ && a.set_offsets_ == b.set_offsets_ &&
           a.members_ == b.members_;
  }

 private:
  friend RRIndex build_rr_index_impl(const Graph&, std::size_t,
                                     std::uint64_t, unsigned,
                                     const std::vector<NodeId>*,
                                     const std::vector<NodeId>*);
  friend RRIndex filter_for_residual(const RRIndex&, const NodeSet&);
  void build_inverted();

  std::size_t n_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> set_offsets_{0};
  std::vector<NodeId> members_;
  std::vector<NodeId> roots_;
  std::vector<std::uint64_t> inv_offsets_;
  std::vector<std::uint32_t> inv_sets_;
  std::vector<NodeId> to_local_;
  std::vector<NodeId> to_original_;
};

// theta RR sets with uniform roots; chunked per-stream sampling makes the
// index identical for every worker count (0 = default_workers()).
RRIndex build_rr_index(const Graph& g, std::size_t theta, std::uint64_t seed,
                       unsigned workers = 0);

// Fresh index on the graph induced by V \ influenced.
RRIndex rebuild_for_residual(const Graph& g, const NodeSet& influenced,
                             std::size_t theta, std::uint64_t seed,
                             unsigned workers = 0);

// Cheap approximation: drops sets rooted in `influenced` and strips
// influenced members. Needs an index with roots.
RRIndex filter_for_residual(const RRIndex& idx, const NodeSet& influenced);

// max(1e4, 20 n ln n), rounded up.
std::size_t default_theta(std::size_t n);

double estimate_influence(const RRIndex& idx, const NodeSet& seeds);
double estimate_alloc_influence(const RRIndex& idx,
                                const DiscountAllocation& alloc,
                                const ProfileMap& profiles);

// Q(c_u, c_v) = a0 + au p_u + av p_v + auv p_u p_v with every other
// discount held fixed.
struct PairCoefficients {
  double a0 = 0.0;
  double au = 0.0;
  double av = 0.0;
  double auv = 0.0;
  double evaluate(double pu, double pv) const {
    return a0 + au * pu + av * pv + auv * pu * pv;
  }
};

PairCoefficients pair_coefficients(const RRIndex& idx,
                                   const DiscountAllocation& alloc,
                                   const ProfileMap& profiles, NodeId u,
                                   NodeId v);

// The index restricted to a candidate list: every RR set is reduced to the
// candidates it contains, and sets with identical reductions are merged
// into one weighted group. Candidates are addressed by position.
class CoverageModel {
 public:
  CoverageModel(const RRIndex& idx, std::span<const NodeId> candidates,
                const ProfileMap& profiles);

  std::size_t size() const { return users_.size(); }
  NodeId user(std::size_t i) const { return users_[i]; }
  const std::vector<NodeId>& users() const { return users_; }
  double prob(std::size_t i, double c) const { return fns_[i](c); }
  const SeedProbFn& prob_fn(std::size_t i) const { return fns_[i]; }
  double scale() const { return scale_; }

  std::size_t group_count() const { return weights_.size(); }
  double weight(std::size_t g) const { return weights_[g]; }
  std::span<const std::uint32_t> members(std::size_t g) const {
    return {members_.data() + offsets_[g], members_.data() + offsets_[g + 1]};
  }
  std::span<const std::uint32_t> groups_of(std::size_t i) const {
    return {groups_.data() + group_offsets_[i],
            groups_.data() + group_offsets_[i + 1]};
  }

  // Estimated influence when candidate i is seeded with probability p[i].
  double value(std::span<const double> p) const;
  PairCoefficients pair(std::size_t i, std::size_t j,
                        std::span<const double> p) const;
  // Estimated influence of seeding candidate i alone.
  double singleton(std::size_t i) const;

 private:
  std::vector<NodeId> users_;
  std::vector<SeedProbFn> fns_;
  double scale_ = 0.0;
  std::vector<double> weights_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<std::uint32_t> members_;
  std::vector<std::uint32_t> group_offsets_;
  std::vector<std::uint32_t> groups_;
};

}  // namespace fpim

#endif  // FPIM_RR_INDEX_HPP_
