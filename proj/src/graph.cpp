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

#include "fpim/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>

namespace fpim {

Graph::Graph(std::size_t node_count, std::vector<Edge> edges, bool directed,
             std::vector<std::uint64_t> labels)
    : node_count_(node_count),
      directed_(directed),
      edges_(std::move(edges)),
      labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != node_count_) {
    throw ArgumentError("label table size does not match node count");
  }
  if (edges_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("too many edges");
  }
  out_offsets_.assign(node_count_ + 1, 0);
  in_offsets_.assign(node_count_ + 1, 0);
  for (const Edge& e : edges_) {
    if (e.source >= node_count_ || e.target >= node_count_) {
      throw ArgumentError("edge endpoint out of range");
    }
    if (!(e.prob >= 0.0 && e.prob <= 1.0)) {
      throw ArgumentError("edge probability outside [0,1]");
    }
    ++out_offsets_[e.source + 1];
    ++in_offsets_[e.target + 1];
  }
  for (std::size_t i = 0; i < node_count_; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_edge_ids_.resize(edges_.size());
  in_edge_ids_.resize(edges_.size());
  std::vector<std::size_t> out_pos(out_offsets_.begin(),
                                   out_offsets_.end() - 1);
  std::vector<std::size_t> in_pos(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    out_edge_ids_[out_pos[edges_[i].source]++] = i;
    in_edge_ids_[in_pos[edges_[i].target]++] = i;
  }
}

Graph with_in_degree_probabilities(const Graph& g, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    e.prob = std::min(1.0, alpha / static_cast<double>(g.in_degree(e.target)));
  }
  std::vector<std::uint64_t> labels(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) labels[u] = g.label(u);
  return Graph(g.node_count(), std::move(edges), g.directed(),
               std::move(labels));
}

namespace {

bool parse_label(std::string_view tok, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

Graph load_edge_list(std::istream& in, bool directed, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  std::unordered_map<std::uint64_t, NodeId> index;
  std::vector<std::uint64_t> labels;
  auto intern = [&](std::uint64_t label) {
    auto [it, fresh] = index.emplace(label, static_cast<NodeId>(labels.size()));
    if (fresh) {
      if (labels.size() >= kNoNode) throw CapacityError("too many nodes");
      labels.push_back(label);
    }
    return it->second;
  };

  std::vector<std::pair<NodeId, NodeId>> arcs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    std::uint64_t a = 0, b = 0;
    if (toks.size() != 2 || !parse_label(toks[0], a) ||
        !parse_label(toks[1], b)) {
      throw ParseError(lineno, "expected two non-negative integer labels");
    }
    NodeId u = intern(a);
    NodeId v = intern(b);
    if (u == v) continue;
    arcs.emplace_back(u, v);
    if (!directed) arcs.emplace_back(v, u);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  std::vector<Edge> edges;
  edges.reserve(arcs.size());
  for (auto [u, v] : arcs) edges.push_back({u, v, 0.0});
  std::size_t n = labels.size();
  Graph raw(n, std::move(edges), directed, std::move(labels));
  return with_in_degree_probabilities(raw, alpha);
}

Graph load_edge_list_file(const std::string& path, bool directed,
                          double alpha) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open edge list: " + path);
  return load_edge_list(in, directed, alpha);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  for (const Edge& e : g.edges()) {
    out << g.label(e.source) << ' ' << g.label(e.target) << '\n';
  }
}

NodeSet neighborhood(const Graph& g, const NodeSet& t) {
  t.check_range(g.node_count(), "neighborhood");
  std::vector<NodeId> out;
  for (NodeId u : t) {
    for (std::uint32_t e : g.out_edges(u)) {
      NodeId w = g.edge(e).target;
      if (!t.contains(w)) out.push_back(w);
    }
  }
  return NodeSet(std::move(out));
}

ResidualGraph residual_subgraph(const Graph& g, const NodeSet& influenced) {
  influenced.check_range(g.node_count(), "residual_subgraph");
  ResidualGraph r;
  r.to_residual.assign(g.node_count(), kNoNode);
  std::vector<std::uint64_t> labels;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (influenced.contains(u)) continue;
    r.to_residual[u] = static_cast<NodeId>(r.to_original.size());
    r.to_original.push_back(u);
    labels.push_back(g.label(u));
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    NodeId s = r.to_residual[e.source];
    NodeId t = r.to_residual[e.target];
    if (s != kNoNode && t != kNoNode) edges.push_back({s, t, e.prob});
  }
  std::size_t n = r.to_original.size();
  r.graph = Graph(n, std::move(edges), g.directed(), std::move(labels));
  return r;
}

NodeSet sample_accessible(const Graph& g, std::size_t k, Rng& rng) {
  std::size_t n = g.node_count();
  if (k > n) throw ArgumentError("sample size exceeds node count");
  // Partial Fisher-Yates over a sparse permutation.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<NodeId> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::size_t vi = at(i), vj = at(j);
    swapped[j] = vi;
    swapped[i] = vj;
    picked.push_back(static_cast<NodeId>(vj));
  }
  return NodeSet(std::move(picked));
}

std::size_t degree(const Graph& g, NodeId u, DegreeKind kind) {
  switch (kind) {
    case DegreeKind::kOut:
      return g.out_degree(u);
    case DegreeKind::kIn:
      return g.in_degree(u);
    case DegreeKind::kTotal:
      return g.directed() ? g.out_degree(u) + g.in_degree(u)
                          : g.out_degree(u);
  }
  return 0;
}

FpStatistics fp_statistics(const Graph& g, const NodeSet& x, DegreeKind kind) {
  if (x.empty()) throw ArgumentError("fp_statistics: empty X");
  NodeSet nx = neighborhood(g, x);
  if (nx.empty()) throw ArgumentError("fp_statistics: empty N(X)");
  auto avg = [&](const NodeSet& s) {
    double sum = 0.0;
    for (NodeId u : s) sum += static_cast<double>(degree(g, u, kind));
    return sum / static_cast<double>(s.size());
  };
  FpStatistics st{avg(x), avg(nx), false};
  st.paradox_holds = st.avg_deg_nx >= st.avg_deg_x;
  return st;
}

std::vector<NodeId> assign_owners(const Graph& g, const NodeSet& x) {
  x.check_range(g.node_count(), "assign_owners");
  std::vector<NodeId> owner(g.node_count(), kNoNode);
  for (NodeId a : x) {
    for (std::uint32_t e : g.out_edges(a)) {
      NodeId w = g.edge(e).target;
      if (owner[w] == kNoNode && !x.contains(w)) owner[w] = a;
    }
  }
  return owner;
}

NodeSet owned_by(const std::vector<NodeId>& owner, const Graph& g,
                 NodeId agent) {
  std::vector<NodeId> out;
  for (std::uint32_t e : g.out_edges(agent)) {
    NodeId w = g.edge(e).target;
    if (owner[w] == agent) out.push_back(w);
  }
  return NodeSet(std::move(out));
}

Graph preferential_attachment(std::size_t n, std::size_t m, double alpha,
                              Rng& rng) {
  if (m == 0 || n <= m) {
    throw ArgumentError("preferential_attachment needs n > m >= 1");
  }
  // `ends` holds each edge endpoint once, so a uniform pick from it is a
  // degree-proportional pick. The first new node links to all m seeds.
  std::vector<NodeId> ends;
  ends.reserve(2 * n * m);
  std::vector<Edge> edges;
  edges.reserve(2 * n * m);
  std::vector<NodeId> targets;
  for (NodeId v = static_cast<NodeId>(m); v < n; ++v) {
    targets.clear();
    if (ends.empty()) {
      for (NodeId s = 0; s < m; ++s) targets.push_back(s);
    } else {
      while (targets.size() < m) {
        NodeId t = ends[uniform_below(rng, ends.size())];
        if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
          targets.push_back(t);
        }
      }
    }
    for (NodeId t : targets) {
      edges.push_back({v, t, 0.0});
      edges.push_back({t, v, 0.0});
      ends.push_back(v);
      ends.push_back(t);
    }
  }
  Graph raw(n, std::move(edges), /*directed=*/false);
  return with_in_degree_probabilities(raw, alpha);
}

}  // namespace fpim
