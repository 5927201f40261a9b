/*
 * Copyright 2026 The aoicast Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aoicast {

enum class NodeRole : std::uint8_t { Source, Router, Destination };

/// Undirected weighted edge; stored canonically with u < v.
struct Edge {
  int u = -1;
  int v = -1;
  double cost = 0.0;
};

constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Parse failure for the textual graph format; message names the line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected network with per-node roles and destination weights.
/// Edges are unique, contain no self-loops, and adjacency is kept sorted by
/// neighbor id so traversals are deterministic.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  explicit NetworkGraph(int node_count);

  int node_count() const { return static_cast<int>(roles_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  NodeRole role(int id) const;
  void set_role(int id, NodeRole role);
  double weight(int id) const;
  void set_weight(int id, double w);

  void add_edge(int u, int v, double cost);
  bool has_edge(int u, int v) const;
  double edge_cost(int u, int v) const;

  const std::vector<Edge>& edges() const { return edges_; }
  /// Neighbors of u as (id, cost), ascending id.
  const std::vector<std::pair<int, double>>& neighbors(int u) const;

  /// Replaces the edge set, keeping roles and weights (topology resampling).
  void replace_edges(std::vector<Edge> edges);

  /// Id of the unique Source node; throws std::logic_error if absent.
  int source() const;
  bool has_source() const;
  std::vector<int> destinations() const;

  /// Checks structural invariants (role count, weight ranges, edge canon).
  void validate() const;

 private:
  void check_node(int id) const;

  std::vector<NodeRole> roles_;
  std::vector<double> weights_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

/// Multicast tree: root plus undirected edges forming a tree that spans the
/// covered destinations (and possibly relay nodes).
struct MulticastTree {
  int root = -1;
  std::vector<Edge> edges;
  std::vector<int> covered;  // sorted destination ids reachable in the tree

  double energy() const;
};

/// Hop distances from `from` to every node; kUnreachable where disconnected.
/// Ties between equal-length paths resolve by ascending neighbor id.
std::vector<int> shortest_hops(const NetworkGraph& g, int from);

/// Hop diameter of the component containing the Source (largest component if
/// no source role is assigned).  Single-node component gives 0.
int graph_length(const NetworkGraph& g);

/// Hop count from t.root to u inside the tree; throws std::domain_error if u
/// is not a tree node.
int tree_hops(const MulticastTree& t, int u);

/// Sum of edge costs of the tree.
double tree_energy(const MulticastTree& t);

/// True iff `edges` form a connected acyclic subgraph of g that contains the
/// source and every destination in `dests`.
bool is_multicast_tree(const std::vector<Edge>& edges, const NetworkGraph& g,
                       const std::vector<int>& dests);

/// Erdos-Renyi graph: every unordered pair independently with probability p,
/// costs uniform in [cost_min, cost_max).
NetworkGraph generate_er(int n, double p, std::uint64_t seed,
                         double cost_min = 0.5, double cost_max = 2.0);

/// Barabasi-Albert graph: m-clique seed, then each arriving node attaches m
/// edges to distinct existing nodes sampled degree-proportionally without
/// replacement.  Requires 1 <= m < n.
NetworkGraph generate_ba(int n, int m, std::uint64_t seed,
                         double cost_min = 0.5, double cost_max = 2.0);

/// Assigns one uniformly chosen Source, floor(dest_fraction * n)
/// Destinations, Routers elsewhere; destination weights drawn uniform (0,1)
/// then normalized to sum 1.
void assign_roles(NetworkGraph& g, double dest_fraction, std::uint64_t seed);

/// Parses the textual graph format:
///   graph <node_count>
///   node <id> <S|R|D> <weight>
///   edge <u> <v> <cost>
/// '#' starts a comment; undeclared nodes default to Router with weight 0.
NetworkGraph ingest_edge_list(const std::string& text);

/// Canonical text form; ingest(serialize(g)) reproduces g byte-for-byte.
std::string serialize_graph(const NetworkGraph& g);

enum class GeneratorKind { Er, Ba, Ingested };

/// "er" -> Er, "ba" -> Ba, anything else -> Ingested (static topology).
GeneratorKind generator_kind_from(const std::string& dataset);

/// Slotted topology process: the edge set is redrawn every resample_period
/// slots (at t = period, 2*period, ...) while roles and weights stay fixed.
/// The graph at slot t is a pure function of (seed, t), so replays agree.
struct TopologyProcess {
  NetworkGraph base;
  GeneratorKind kind = GeneratorKind::Ingested;
  int resample_period = 20;
  double er_p = 0.3;
  int ba_m = 2;
  double cost_min = 0.5;
  double cost_max = 2.0;
  std::uint64_t seed = 0;
};

/// Graph in effect at slot t.  Ingested processes are static.
NetworkGraph resample_topology(const TopologyProcess& proc, int t);

}  // namespace aoicast
