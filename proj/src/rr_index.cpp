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

#include "fpim/rr_index.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "fpim/parallel.hpp"

namespace fpim {

namespace {

constexpr std::size_t kSetsPerChunk = 2048;
constexpr char kMagic[4] = {'F', 'P', 'R', 'R'};
constexpr std::uint32_t kVersion = 1;

struct ChunkSets {
  std::vector<std::uint64_t> offsets{0};
  std::vector<NodeId> members;
  std::vector<NodeId> roots;
};

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DatasetError("truncated RR index cache");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw DatasetError("truncated RR index cache");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

RRIndex::RRIndex(std::size_t n, const std::vector<std::vector<NodeId>>& sets,
                 std::vector<NodeId> roots, std::uint64_t seed)
    : n_(n), seed_(seed), roots_(std::move(roots)) {
  if (!roots_.empty() && roots_.size() != sets.size()) {
    throw ArgumentError("one root per RR set required");
  }
  for (const auto& s : sets) {
    std::vector<NodeId> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (NodeId v : sorted) {
      if (v >= n_) throw ArgumentError("RR set member out of range");
    }
    members_.insert(members_.end(), sorted.begin(), sorted.end());
    set_offsets_.push_back(members_.size());
  }
  build_inverted();
}

void RRIndex::build_inverted() {
  inv_offsets_.assign(n_ + 1, 0);
  for (NodeId v : members_) ++inv_offsets_[v + 1];
  for (std::size_t i = 0; i < n_; ++i) inv_offsets_[i + 1] += inv_offsets_[i];
  inv_sets_.resize(members_.size());
  std::vector<std::uint64_t> pos(inv_offsets_.begin(), inv_offsets_.end() - 1);
  for (std::size_t s = 0; s < theta(); ++s) {
    for (NodeId v : set(s)) inv_sets_[pos[v]++] = static_cast<std::uint32_t>(s);
  }
}

RRIndex build_rr_index_impl(const Graph& g, std::size_t theta,
                            std::uint64_t seed, unsigned workers,
                            const std::vector<NodeId>* to_local,
                            const std::vector<NodeId>* to_original) {
  if (theta == 0) throw ArgumentError("theta must be >= 1");
  if (theta > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("theta exceeds 32-bit set ids");
  }
  if (workers == 0) workers = default_workers();
  RRIndex idx;
  idx.n_ = g.node_count();
  idx.seed_ = seed;
  if (to_local != nullptr) idx.to_local_ = *to_local;
  if (to_original != nullptr) idx.to_original_ = *to_original;
  std::size_t n = g.node_count();
  if (n == 0) {
    idx.build_inverted();
    return idx;
  }

  std::size_t chunks = (theta + kSetsPerChunk - 1) / kSetsPerChunk;
  std::vector<ChunkSets> parts(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    Rng rng = make_stream(seed, c);
    std::vector<std::uint32_t> mark(n, 0);
    std::uint32_t epoch = 0;
    ChunkSets& out = parts[c];
    std::size_t begin = c * kSetsPerChunk;
    std::size_t end = std::min(theta, begin + kSetsPerChunk);
    for (std::size_t s = begin; s < end; ++s) {
      ++epoch;
      auto root = static_cast<NodeId>(uniform_below(rng, n));
      std::size_t first = out.members.size();
      out.members.push_back(root);
      mark[root] = epoch;
      for (std::size_t head = first; head < out.members.size(); ++head) {
        NodeId v = out.members[head];
        for (std::uint32_t e : g.in_edges(v)) {
          const Edge& edge = g.edge(e);
          if (mark[edge.source] == epoch) continue;
          if (uniform01(rng) < edge.prob) {
            mark[edge.source] = epoch;
            out.members.push_back(edge.source);
          }
        }
      }
      std::sort(out.members.begin() + static_cast<std::ptrdiff_t>(first),
                out.members.end());
      out.offsets.push_back(out.members.size());
      out.roots.push_back(root);
    }
  });

  std::size_t total = 0;
  for (const auto& p : parts) total += p.members.size();
  idx.members_.reserve(total);
  idx.set_offsets_.reserve(theta + 1);
  idx.roots_.reserve(theta);
  for (auto& p : parts) {
    std::uint64_t base = idx.members_.size();
    idx.members_.insert(idx.members_.end(), p.members.begin(),
                        p.members.end());
    for (std::size_t i = 1; i < p.offsets.size(); ++i) {
      idx.set_offsets_.push_back(base + p.offsets[i]);
    }
    idx.roots_.insert(idx.roots_.end(), p.roots.begin(), p.roots.end());
    p = ChunkSets{};
  }
  idx.build_inverted();
  return idx;
}

RRIndex build_rr_index(const Graph& g, std::size_t theta, std::uint64_t seed,
                       unsigned workers) {
  return build_rr_index_impl(g, theta, seed, workers, nullptr, nullptr);
}

RRIndex rebuild_for_residual(const Graph& g, const NodeSet& influenced,
                             std::size_t theta, std::uint64_t seed,
                             unsigned workers) {
  if (influenced.empty()) return build_rr_index(g, theta, seed, workers);
  ResidualGraph r = residual_subgraph(g, influenced);
  return build_rr_index_impl(r.graph, theta, seed, workers, &r.to_residual,
                             &r.to_original);
}

RRIndex filter_for_residual(const RRIndex& idx, const NodeSet& influenced) {
  if (!idx.has_roots()) {
    throw ArgumentError("filtering needs an index that kept its roots");
  }
  if (!idx.to_local_.empty()) {
    throw ArgumentError("filtering applies to full-graph indexes only");
  }
  influenced.check_range(idx.n_, "filter_for_residual");
  RRIndex out;
  out.seed_ = idx.seed_;
  out.to_local_.assign(idx.n_, kNoNode);
  for (NodeId u = 0; u < idx.n_; ++u) {
    if (influenced.contains(u)) continue;
    out.to_local_[u] = static_cast<NodeId>(out.to_original_.size());
    out.to_original_.push_back(u);
  }
  out.n_ = out.to_original_.size();
  for (std::size_t s = 0; s < idx.theta(); ++s) {
    NodeId root = out.to_local_[idx.root(s)];
    if (root == kNoNode) continue;
    for (NodeId v : idx.set(s)) {
      NodeId l = out.to_local_[v];
      if (l != kNoNode) out.members_.push_back(l);
    }
    out.set_offsets_.push_back(out.members_.size());
    out.roots_.push_back(root);
  }
  out.build_inverted();
  return out;
}

std::size_t default_theta(std::size_t n) {
  double v = n < 2 ? 0.0
                   : 20.0 * static_cast<double>(n) *
                         std::log(static_cast<double>(n));
  return std::max<std::size_t>(10000, static_cast<std::size_t>(std::ceil(v)));
}

void RRIndex::save(std::ostream& out) const {
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u64(out, n_);
  write_u64(out, theta());
  write_u64(out, seed_);
  for (std::size_t s = 0; s < theta(); ++s) {
    auto members = set(s);
    write_u32(out, static_cast<std::uint32_t>(members.size()));
    for (NodeId v : members) write_u32(out, v);
  }
  if (!out) throw DatasetError("failed writing RR index cache");
}

RRIndex RRIndex::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DatasetError("not an RR index cache");
  }
  if (read_u32(in) != kVersion) {
    throw DatasetError("unsupported RR index cache version");
  }
  RRIndex idx;
  idx.n_ = read_u64(in);
  std::uint64_t theta = read_u64(in);
  idx.seed_ = read_u64(in);
  idx.set_offsets_.reserve(theta + 1);
  for (std::uint64_t s = 0; s < theta; ++s) {
    std::uint32_t len = read_u32(in);
    NodeId prev = 0;
    for (std::uint32_t k = 0; k < len; ++k) {
      NodeId v = read_u32(in);
      if (v >= idx.n_ || (k > 0 && v <= prev)) {
        throw DatasetError("corrupt RR index cache");
      }
      prev = v;
      idx.members_.push_back(v);
    }
    idx.set_offsets_.push_back(idx.members_.size());
  }
  idx.build_inverted();
  return idx;
}

double estimate_influence(const RRIndex& idx, const NodeSet& seeds) {
  if (idx.theta() == 0 || seeds.empty()) return 0.0;
  std::vector<std::uint8_t> hit(idx.theta(), 0);
  std::size_t covered = 0;
  for (NodeId u : seeds) {
    for (std::uint32_t s : idx.sets_containing(u)) {
      if (!hit[s]) {
        hit[s] = 1;
        ++covered;
      }
    }
  }
  return static_cast<double>(covered) * idx.scale();
}

namespace {

// Per-set products of (1 - p) over allocation users other than u and v.
struct SetProducts {
  std::unordered_map<std::uint32_t, double> prod;

  SetProducts(const RRIndex& idx, const DiscountAllocation& alloc,
              const ProfileMap& profiles, NodeId skip_u, NodeId skip_v) {
    for (const auto& [w, c] : alloc.entries()) {
      if (w == skip_u || w == skip_v) continue;
      double q = 1.0 - profiles.at(w)(c);
      if (q == 1.0) continue;
      for (std::uint32_t s : idx.sets_containing(w)) {
        auto [it, fresh] = prod.emplace(s, q);
        if (!fresh) it->second *= q;
      }
    }
  }
  double get(std::uint32_t s) const {
    auto it = prod.find(s);
    return it == prod.end() ? 1.0 : it->second;
  }
};

}  // namespace

double estimate_alloc_influence(const RRIndex& idx,
                                const DiscountAllocation& alloc,
                                const ProfileMap& profiles) {
  if (idx.theta() == 0) return 0.0;
  SetProducts sp(idx, alloc, profiles, kNoNode, kNoNode);
  double sum = 0.0;
  for (const auto& [s, q] : sp.prod) sum += 1.0 - q;
  return sum * idx.scale();
}

PairCoefficients pair_coefficients(const RRIndex& idx,
                                   const DiscountAllocation& alloc,
                                   const ProfileMap& profiles, NodeId u,
                                   NodeId v) {
  if (u == v) throw ArgumentError("pair_coefficients needs u != v");
  PairCoefficients pc;
  if (idx.theta() == 0) return pc;
  SetProducts sp(idx, alloc, profiles, u, v);
  auto in_u = idx.sets_containing(u);
  auto in_v = idx.sets_containing(v);
  std::unordered_map<std::uint32_t, std::uint8_t> touched;
  for (std::uint32_t s : in_u) touched[s] |= 1;
  for (std::uint32_t s : in_v) touched[s] |= 2;
  for (const auto& [s, q] : sp.prod) {
    if (!touched.count(s)) pc.a0 += 1.0 - q;
  }
  for (const auto& [s, mask] : touched) {
    double r = sp.get(s);
    pc.a0 += 1.0 - r;
    if (mask & 1) pc.au += r;
    if (mask & 2) pc.av += r;
    if (mask == 3) pc.auv -= r;
  }
  double k = idx.scale();
  pc.a0 *= k;
  pc.au *= k;
  pc.av *= k;
  pc.auv *= k;
  return pc;
}

CoverageModel::CoverageModel(const RRIndex& idx,
                             std::span<const NodeId> candidates,
                             const ProfileMap& profiles)
    : users_(candidates.begin(), candidates.end()), scale_(idx.scale()) {
  fns_.reserve(users_.size());
  for (NodeId u : users_) fns_.push_back(profiles.at(u));

  // Bucket candidates by RR set; candidates arrive in order, so every
  // bucket is sorted. Reduced sets keep the set order.
  std::vector<std::uint32_t> start(idx.theta() + 1, 0);
  for (NodeId u : users_) {
    for (std::uint32_t s : idx.sets_containing(u)) ++start[s + 1];
  }
  for (std::size_t s = 0; s < idx.theta(); ++s) start[s + 1] += start[s];
  std::vector<std::uint32_t> bucket(start.back());
  std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
  for (std::uint32_t i = 0; i < users_.size(); ++i) {
    for (std::uint32_t s : idx.sets_containing(users_[i])) bucket[fill[s]++] = i;
  }
  std::vector<std::uint32_t> red_off{0};
  std::vector<std::uint32_t> red_mem;
  red_mem.reserve(bucket.size());
  for (std::size_t s = 0; s < idx.theta(); ++s) {
    if (start[s] == start[s + 1]) continue;
    for (std::uint32_t e = start[s]; e < start[s + 1]; ++e) {
      if (e == start[s] || bucket[e] != bucket[e - 1]) {
        red_mem.push_back(bucket[e]);
      }
    }
    red_off.push_back(static_cast<std::uint32_t>(red_mem.size()));
  }
  std::size_t reduced = red_off.size() - 1;
  auto span_of = [&](std::size_t r) {
    return std::span<const std::uint32_t>(red_mem.data() + red_off[r],
                                          red_mem.data() + red_off[r + 1]);
  };
  std::vector<std::uint32_t> order(reduced);
  for (std::uint32_t r = 0; r < reduced; ++r) order[r] = r;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    auto sa = span_of(a), sb = span_of(b);
    return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(),
                                        sb.end());
  });
  for (std::size_t k = 0; k < order.size();) {
    auto sk = span_of(order[k]);
    std::size_t e = k + 1;
    while (e < order.size()) {
      auto se = span_of(order[e]);
      if (!std::equal(sk.begin(), sk.end(), se.begin(), se.end())) break;
      ++e;
    }
    weights_.push_back(static_cast<double>(e - k));
    members_.insert(members_.end(), sk.begin(), sk.end());
    offsets_.push_back(static_cast<std::uint32_t>(members_.size()));
    k = e;
  }

  group_offsets_.assign(users_.size() + 1, 0);
  for (std::uint32_t m : members_) ++group_offsets_[m + 1];
  for (std::size_t i = 0; i < users_.size(); ++i) {
    group_offsets_[i + 1] += group_offsets_[i];
  }
  groups_.resize(members_.size());
  std::vector<std::uint32_t> pos(group_offsets_.begin(),
                                 group_offsets_.end() - 1);
  for (std::uint32_t g = 0; g < weights_.size(); ++g) {
    for (std::uint32_t m : members(g)) groups_[pos[m]++] = g;
  }
}

double CoverageModel::value(std::span<const double> p) const {
  double sum = 0.0;
  for (std::size_t g = 0; g < weights_.size(); ++g) {
    double q = 1.0;
    for (std::uint32_t m : members(g)) q *= 1.0 - p[m];
    sum += weights_[g] * (1.0 - q);
  }
  return sum * scale_;
}

PairCoefficients CoverageModel::pair(std::size_t i, std::size_t j,
                                     std::span<const double> p) const {
  PairCoefficients pc;
  for (std::size_t g = 0; g < weights_.size(); ++g) {
    double r = 1.0;
    unsigned mask = 0;
    for (std::uint32_t m : members(g)) {
      if (m == i) {
        mask |= 1;
      } else if (m == j) {
        mask |= 2;
      } else {
        r *= 1.0 - p[m];
      }
    }
    double w = weights_[g];
    pc.a0 += w * (1.0 - r);
    if (mask & 1) pc.au += w * r;
    if (mask & 2) pc.av += w * r;
    if (mask == 3) pc.auv -= w * r;
  }
  pc.a0 *= scale_;
  pc.au *= scale_;
  pc.av *= scale_;
  pc.auv *= scale_;
  return pc;
}

double CoverageModel::singleton(std::size_t i) const {
  double w = 0.0;
  for (std::uint32_t g : groups_of(i)) w += weights_[g];
  return w * scale_;
}

}  // namespace fpim
