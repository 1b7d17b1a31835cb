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

#ifndef FPIM_GRAPH_HPP_
#define FPIM_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fpim/common.hpp"
#include "fpim/random.hpp"

namespace fpim {

struct Edge {
  NodeId source;
  NodeId target;
  double prob;
};

// Immutable influence graph with CSR adjacency in both directions.
// `directed == false` marks a graph built from an undirected source: every
// undirected edge is stored as two directed edges.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t node_count, std::vector<Edge> edges, bool directed = true,
        std::vector<std::uint64_t> labels = {});

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool directed() const { return directed_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  // Edge indices leaving / entering a node.
  std::span<const std::uint32_t> out_edges(NodeId u) const {
    return {out_edge_ids_.data() + out_offsets_[u],
            out_edge_ids_.data() + out_offsets_[u + 1]};
  }
  std::span<const std::uint32_t> in_edges(NodeId v) const {
    return {in_edge_ids_.data() + in_offsets_[v],
            in_edge_ids_.data() + in_offsets_[v + 1]};
  }
  std::size_t out_degree(NodeId u) const {
    return out_offsets_[u + 1] - out_offsets_[u];
  }
  std::size_t in_degree(NodeId v) const {
    return in_offsets_[v + 1] - in_offsets_[v];
  }

  // Original label of a node (identity when none were supplied).
  std::uint64_t label(NodeId u) const {
    return labels_.empty() ? u : labels_[u];
  }

 private:
  std::size_t node_count_ = 0;
  bool directed_ = true;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> labels_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::uint32_t> out_edge_ids_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<std::uint32_t> in_edge_ids_;
};

// Same topology, p_uv = min(1, alpha / in-degree(v)).
Graph with_in_degree_probabilities(const Graph& g, double alpha);

// SNAP-style "u v" lines; '#' lines and blank lines skipped. Labels are
// re-indexed densely in order of first appearance. Self-loops and repeated
// edges are dropped.
Graph load_edge_list(std::istream& in, bool directed, double alpha);
Graph load_edge_list_file(const std::string& path, bool directed,
                          double alpha);
// One "label label" line per directed edge.
void write_edge_list(const Graph& g, std::ostream& out);

NodeSet neighborhood(const Graph& g, const NodeSet& t);

struct ResidualGraph {
  Graph graph;
  std::vector<NodeId> to_original;  // residual id -> original id
  std::vector<NodeId> to_residual;  // original id -> residual id or kNoNode
};
ResidualGraph residual_subgraph(const Graph& g, const NodeSet& influenced);

NodeSet sample_accessible(const Graph& g, std::size_t k, Rng& rng);

enum class DegreeKind { kTotal, kOut, kIn };

// Total degree is in+out for directed graphs and the undirected degree for
// graphs built from an undirected source.
std::size_t degree(const Graph& g, NodeId u,
                   DegreeKind kind = DegreeKind::kTotal);

struct FpStatistics {
  double avg_deg_x;
  double avg_deg_nx;
  bool paradox_holds;
};
FpStatistics fp_statistics(const Graph& g, const NodeSet& x,
                           DegreeKind kind = DegreeKind::kTotal);

// owner[w] = lowest-id agent in x adjacent to w, for w in N(x) \ x; kNoNode
// elsewhere.
std::vector<NodeId> assign_owners(const Graph& g, const NodeSet& x);
// Nodes owned by `agent`.
NodeSet owned_by(const std::vector<NodeId>& owner, const Graph& g,
                 NodeId agent);

// Barabasi-Albert graph: each new node links to m distinct earlier nodes
// chosen proportionally to degree. Undirected, probabilities alpha/in-degree.
Graph preferential_attachment(std::size_t n, std::size_t m, double alpha,
                              Rng& rng);

}  // namespace fpim

#endif  // FPIM_GRAPH_HPP_
