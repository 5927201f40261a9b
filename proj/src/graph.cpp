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

#include "aoicast/graph.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <sstream>

#include "aoicast/rng.hpp"

namespace aoicast {

NetworkGraph::NetworkGraph(int node_count) {
  if (node_count < 0) throw std::invalid_argument("node_count must be >= 0");
  roles_.assign(node_count, NodeRole::Router);
  weights_.assign(node_count, 0.0);
  adjacency_.assign(node_count, {});
}

void NetworkGraph::check_node(int id) const {
  if (id < 0 || id >= node_count())
    throw std::out_of_range("node id " + std::to_string(id) +
                            " out of range for " +
                            std::to_string(node_count()) + " nodes");
}

NodeRole NetworkGraph::role(int id) const {
  check_node(id);
  return roles_[id];
}

void NetworkGraph::set_role(int id, NodeRole role) {
  check_node(id);
  roles_[id] = role;
}

double NetworkGraph::weight(int id) const {
  check_node(id);
  return weights_[id];
}

void NetworkGraph::set_weight(int id, double w) {
  check_node(id);
  weights_[id] = w;
}

void NetworkGraph::add_edge(int u, int v, double cost) {
  check_node(u);
  check_node(v);
  if (u == v) throw std::invalid_argument("self-loop edge rejected");
  if (has_edge(u, v))
    throw std::invalid_argument("duplicate edge (" + std::to_string(u) + "," +
                                std::to_string(v) + ")");
  if (u > v) std::swap(u, v);
  edges_.push_back(Edge{u, v, cost});
  auto insert_sorted = [](std::vector<std::pair<int, double>>& adj, int id,
                          double c) {
    auto it = std::lower_bound(
        adj.begin(), adj.end(), id,
        [](const std::pair<int, double>& a, int b) { return a.first < b; });
    adj.insert(it, {id, c});
  };
  insert_sorted(adjacency_[u], v, cost);
  insert_sorted(adjacency_[v], u, cost);
}

bool NetworkGraph::has_edge(int u, int v) const {
  check_node(u);
  check_node(v);
  const auto& adj = adjacency_[u];
  auto it = std::lower_bound(
      adj.begin(), adj.end(), v,
      [](const std::pair<int, double>& a, int b) { return a.first < b; });
  return it != adj.end() && it->first == v;
}

double NetworkGraph::edge_cost(int u, int v) const {
  check_node(u);
  check_node(v);
  const auto& adj = adjacency_[u];
  auto it = std::lower_bound(
      adj.begin(), adj.end(), v,
      [](const std::pair<int, double>& a, int b) { return a.first < b; });
  if (it == adj.end() || it->first != v)
    throw std::domain_error("edge (" + std::to_string(u) + "," +
                            std::to_string(v) + ") absent");
  return it->second;
}

const std::vector<std::pair<int, double>>& NetworkGraph::neighbors(
    int u) const {
  check_node(u);
  return adjacency_[u];
}

void NetworkGraph::replace_edges(std::vector<Edge> edges) {
  edges_.clear();
  for (auto& a : adjacency_) a.clear();
  for (const Edge& e : edges) add_edge(e.u, e.v, e.cost);
}

bool NetworkGraph::has_source() const {
  for (NodeRole r : roles_)
    if (r == NodeRole::Source) return true;
  return false;
}

int NetworkGraph::source() const {
  for (int i = 0; i < node_count(); ++i)
    if (roles_[i] == NodeRole::Source) return i;
  throw std::logic_error("graph has no Source node");
}

std::vector<int> NetworkGraph::destinations() const {
  std::vector<int> out;
  for (int i = 0; i < node_count(); ++i)
    if (roles_[i] == NodeRole::Destination) out.push_back(i);
  return out;
}

void NetworkGraph::validate() const {
  int sources = 0;
  for (NodeRole r : roles_)
    if (r == NodeRole::Source) ++sources;
  if (sources != 1)
    throw std::logic_error("expected exactly one Source, found " +
                           std::to_string(sources));
  for (int i = 0; i < node_count(); ++i) {
    if (roles_[i] == NodeRole::Destination) {
      if (!(weights_[i] > 0.0 && weights_[i] <= 1.0))
        throw std::logic_error("destination weight out of (0,1] at node " +
                               std::to_string(i));
    }
  }
  for (const Edge& e : edges_) {
    if (e.u >= e.v) throw std::logic_error("edge not canonical (u < v)");
    if (e.u < 0 || e.v >= node_count())
      throw std::logic_error("edge endpoint out of range");
  }
}

double MulticastTree::energy() const { return tree_energy(*this); }

std::vector<int> shortest_hops(const NetworkGraph& g, int from) {
  if (from < 0 || from >= g.node_count())
    throw std::out_of_range("shortest_hops: bad start node");
  std::vector<int> dist(g.node_count(), kUnreachable);
  std::deque<int> queue;
  dist[from] = 0;
  queue.push_back(from);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const auto& [v, cost] : g.neighbors(u)) {
      (void)cost;
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

namespace {

std::vector<int> component_of(const NetworkGraph& g, int start) {
  std::vector<int> comp;
  const std::vector<int> d = shortest_hops(g, start);
  for (int i = 0; i < g.node_count(); ++i)
    if (d[i] != kUnreachable) comp.push_back(i);
  return comp;
}

}  // namespace

int graph_length(const NetworkGraph& g) {
  if (g.node_count() == 0)
    throw std::invalid_argument("graph_length: empty graph");
  std::vector<int> comp;
  if (g.has_source()) {
    comp = component_of(g, g.source());
  } else {
    // no roles assigned yet: use the largest component
    std::vector<char> seen(g.node_count(), 0);
    for (int i = 0; i < g.node_count(); ++i) {
      if (seen[i]) continue;
      std::vector<int> c = component_of(g, i);
      for (int v : c) seen[v] = 1;
      if (c.size() > comp.size()) comp = c;
    }
  }
  int diameter = 0;
  for (int u : comp) {
    const std::vector<int> d = shortest_hops(g, u);
    for (int v : comp)
      if (d[v] != kUnreachable) diameter = std::max(diameter, d[v]);
  }
  return diameter;
}

int tree_hops(const MulticastTree& t, int u) {
  if (t.root < 0) throw std::domain_error("tree_hops: tree has no root");
  // BFS over the tree's own adjacency; trees are small so rebuild per call.
  std::vector<std::pair<int, int>> adj;  // (node, neighbor)
  int max_id = t.root;
  for (const Edge& e : t.edges) max_id = std::max({max_id, e.u, e.v});
  if (u > max_id || u < 0) throw std::domain_error("tree_hops: node not in tree");
  std::vector<std::vector<int>> nbrs(max_id + 1);
  for (const Edge& e : t.edges) {
    nbrs[e.u].push_back(e.v);
    nbrs[e.v].push_back(e.u);
  }
  std::vector<int> dist(max_id + 1, kUnreachable);
  std::deque<int> queue;
  dist[t.root] = 0;
  queue.push_back(t.root);
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int y : nbrs[x]) {
      if (dist[y] == kUnreachable) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  if (dist[u] == kUnreachable)
    throw std::domain_error("tree_hops: node " + std::to_string(u) +
                            " not in tree");
  return dist[u];
}

double tree_energy(const MulticastTree& t) {
  double total = 0.0;
  for (const Edge& e : t.edges) total += e.cost;
  return total;
}

bool is_multicast_tree(const std::vector<Edge>& edges, const NetworkGraph& g,
                       const std::vector<int>& dests) {
  if (!g.has_source()) return false;
  const int root = g.source();
  std::vector<int> nodes{root};
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v >= g.node_count() || e.u >= e.v) return false;
    if (!g.has_edge(e.u, e.v)) return false;
    nodes.push_back(e.u);
    nodes.push_back(e.v);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  // duplicate edges would hide a cycle from the edge-count test
  std::vector<std::pair<int, int>> keys;
  keys.reserve(edges.size());
  for (const Edge& e : edges) keys.emplace_back(e.u, e.v);
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) return false;
  // connected + acyclic <=> |E| = |V| - 1 and all nodes reachable from root
  if (static_cast<int>(edges.size()) != static_cast<int>(nodes.size()) - 1)
    return false;
  MulticastTree t;
  t.root = root;
  t.edges = edges;
  for (int n : nodes) {
    try {
      (void)tree_hops(t, n);
    } catch (const std::domain_error&) {
      return false;
    }
  }
  for (int d : dests) {
    if (!std::binary_search(nodes.begin(), nodes.end(), d)) return false;
  }
  return true;
}

namespace {

std::vector<Edge> draw_er_edges(int n, double p, Rng& rng, double cost_min,
                                double cost_max) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < p)
        edges.push_back(Edge{u, v, rng.uniform(cost_min, cost_max)});
    }
  }
  return edges;
}

std::vector<Edge> draw_ba_edges(int n, int m, Rng& rng, double cost_min,
                                double cost_max) {
  std::vector<Edge> edges;
  std::vector<int> degree(n, 0);
  for (int u = 0; u < m; ++u) {
    for (int v = u + 1; v < m; ++v) {
      edges.push_back(Edge{u, v, rng.uniform(cost_min, cost_max)});
      ++degree[u];
      ++degree[v];
    }
  }
  for (int k = m; k < n; ++k) {
    std::vector<char> chosen(k, 0);
    for (int pick = 0; pick < m; ++pick) {
      double total = 0.0;
      for (int v = 0; v < k; ++v)
        if (!chosen[v]) total += degree[v];
      int target = -1;
      if (total <= 0.0) {
        // all remaining candidates have zero degree (single seed node case)
        int remaining = 0;
        for (int v = 0; v < k; ++v)
          if (!chosen[v]) ++remaining;
        int idx = rng.uniform_int(0, remaining - 1);
        for (int v = 0; v < k; ++v) {
          if (chosen[v]) continue;
          if (idx-- == 0) {
            target = v;
            break;
          }
        }
      } else {
        double r = rng.uniform() * total;
        for (int v = 0; v < k; ++v) {
          if (chosen[v]) continue;
          r -= degree[v];
          if (r < 0.0) {
            target = v;
            break;
          }
        }
        if (target < 0) {
          for (int v = k - 1; v >= 0; --v)
            if (!chosen[v]) {
              target = v;
              break;
            }
        }
      }
      chosen[target] = 1;
      edges.push_back(Edge{std::min(target, k), std::max(target, k),
                           rng.uniform(cost_min, cost_max)});
      ++degree[target];
      ++degree[k];
    }
  }
  return edges;
}

}  // namespace

NetworkGraph generate_er(int n, double p, std::uint64_t seed, double cost_min,
                         double cost_max) {
  if (n < 0) throw std::invalid_argument("generate_er: n must be >= 0");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("generate_er: p must lie in [0,1]");
  NetworkGraph g(n);
  Rng rng(seed);
  for (const Edge& e : draw_er_edges(n, p, rng, cost_min, cost_max))
    g.add_edge(e.u, e.v, e.cost);
  return g;
}

NetworkGraph generate_ba(int n, int m, std::uint64_t seed, double cost_min,
                         double cost_max) {
  if (n < 1) throw std::invalid_argument("generate_ba: n must be >= 1");
  if (m < 1 || m >= n)
    throw std::invalid_argument("generate_ba: need 1 <= m < n");
  NetworkGraph g(n);
  Rng rng(seed);
  for (const Edge& e : draw_ba_edges(n, m, rng, cost_min, cost_max))
    g.add_edge(e.u, e.v, e.cost);
  return g;
}

void assign_roles(NetworkGraph& g, double dest_fraction, std::uint64_t seed) {
  const int n = g.node_count();
  if (n < 1) throw std::invalid_argument("assign_roles: empty graph");
  if (dest_fraction < 0.0 || dest_fraction > 1.0)
    throw std::invalid_argument("assign_roles: fraction must lie in [0,1]");
  const int dest_count = static_cast<int>(dest_fraction * n);
  if (dest_count >= n)
    throw std::invalid_argument("assign_roles: no node left for the source");
  Rng rng(seed);
  for (int i = 0; i < n; ++i) g.set_role(i, NodeRole::Router);
  for (int i = 0; i < n; ++i) g.set_weight(i, 0.0);
  const int src = rng.uniform_int(0, n - 1);
  g.set_role(src, NodeRole::Source);
  std::vector<int> pool;
  for (int i = 0; i < n; ++i)
    if (i != src) pool.push_back(i);
  std::vector<int> dests;
  for (int k = 0; k < dest_count; ++k) {
    const int idx = rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
    dests.push_back(pool[idx]);
    pool.erase(pool.begin() + idx);
  }
  std::sort(dests.begin(), dests.end());
  std::vector<double> raw;
  double total = 0.0;
  for (size_t i = 0; i < dests.size(); ++i) {
    double w;
    do {
      w = rng.uniform();
    } while (w <= 0.0);
    raw.push_back(w);
    total += w;
  }
  for (size_t i = 0; i < dests.size(); ++i) {
    g.set_role(dests[i], NodeRole::Destination);
    g.set_weight(dests[i], raw[i] / total);
  }
}

namespace {

std::string format_real(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

NetworkGraph ingest_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  NetworkGraph g;
  std::vector<char> declared;
  auto fail = [&](const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;  // blank or comment-only line
    if (tag == "graph") {
      if (have_header) fail("duplicate graph header");
      int n;
      if (!(ls >> n) || n < 0) fail("malformed graph header");
      g = NetworkGraph(n);
      declared.assign(n, 0);
      have_header = true;
    } else if (tag == "node") {
      if (!have_header) fail("node line before graph header");
      int id;
      std::string role;
      double w;
      if (!(ls >> id >> role >> w)) fail("malformed node line");
      if (id < 0 || id >= g.node_count()) fail("unknown node id " + std::to_string(id));
      if (declared[id]) fail("duplicate node " + std::to_string(id));
      declared[id] = 1;
      if (role == "S")
        g.set_role(id, NodeRole::Source);
      else if (role == "R")
        g.set_role(id, NodeRole::Router);
      else if (role == "D")
        g.set_role(id, NodeRole::Destination);
      else
        fail("unknown role '" + role + "'");
      g.set_weight(id, w);
    } else if (tag == "edge") {
      if (!have_header) fail("edge line before graph header");
      int u, v;
      double cost;
      if (!(ls >> u >> v >> cost)) fail("malformed edge line");
      if (u < 0 || u >= g.node_count()) fail("unknown node id " + std::to_string(u));
      if (v < 0 || v >= g.node_count()) fail("unknown node id " + std::to_string(v));
      if (u == v) fail("self-loop edge");
      if (g.has_edge(u, v)) fail("duplicate edge");
      g.add_edge(u, v, cost);
    } else {
      fail("unknown directive '" + tag + "'");
    }
  }
  if (!have_header) {
    line_no = 0;
    fail("missing graph header");
  }
  return g;
}

std::string serialize_graph(const NetworkGraph& g) {
  std::ostringstream os;
  os << "graph " << g.node_count() << "\n";
  for (int i = 0; i < g.node_count(); ++i) {
    char r = 'R';
    if (g.role(i) == NodeRole::Source) r = 'S';
    if (g.role(i) == NodeRole::Destination) r = 'D';
    os << "node " << i << " " << r << " " << format_real(g.weight(i)) << "\n";
  }
  std::vector<Edge> edges = g.edges();
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  for (const Edge& e : edges)
    os << "edge " << e.u << " " << e.v << " " << format_real(e.cost) << "\n";
  return os.str();
}

GeneratorKind generator_kind_from(const std::string& dataset) {
  if (dataset == "er") return GeneratorKind::Er;
  if (dataset == "ba") return GeneratorKind::Ba;
  return GeneratorKind::Ingested;
}

NetworkGraph resample_topology(const TopologyProcess& proc, int t) {
  if (t < 0) throw std::invalid_argument("resample_topology: t must be >= 0");
  if (proc.resample_period <= 0) return proc.base;
  const int k = t / proc.resample_period;
  if (k == 0 || proc.kind == GeneratorKind::Ingested) return proc.base;
  const int n = proc.base.node_count();
  Rng rng(mix_seed(proc.seed, static_cast<std::uint64_t>(k)));
  std::vector<Edge> edges;
  if (proc.kind == GeneratorKind::Er) {
    edges = [&] {
      std::vector<Edge> out;
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (rng.uniform() < proc.er_p)
            out.push_back(Edge{u, v, rng.uniform(proc.cost_min, proc.cost_max)});
      return out;
    }();
  } else {
    NetworkGraph fresh = generate_ba(n, proc.ba_m,
                                     mix_seed(proc.seed, static_cast<std::uint64_t>(k)),
                                     proc.cost_min, proc.cost_max);
    edges = fresh.edges();
  }
  NetworkGraph g = proc.base;
  g.replace_edges(std::move(edges));
  return g;
}

}  // namespace aoicast
