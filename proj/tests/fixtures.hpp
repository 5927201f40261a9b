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

#include <algorithm>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "aoicast/graph.hpp"
#include "aoicast/tree_mdp.hpp"

namespace aoicast::testing {

/// Four-node fixture: source 0, router 1, destinations 2 (weight 0.6) and
/// 3 (weight 0.4); edges (0,1,c=1), (1,2,c=2), (1,3,c=1), (0,2,c=5).
inline NetworkGraph make_g4() {
  NetworkGraph g(4);
  g.set_role(0, NodeRole::Source);
  g.set_role(2, NodeRole::Destination);
  g.set_weight(2, 0.6);
  g.set_role(3, NodeRole::Destination);
  g.set_weight(3, 0.4);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 2.0);
  g.add_edge(1, 3, 1.0);
  g.add_edge(0, 2, 5.0);
  return g;
}

/// Tree through the router: edges {(0,1),(1,2),(1,3)}, energy 4.
inline MulticastTree make_t4() {
  MulticastTree t;
  t.root = 0;
  t.edges = {{0, 1, 1.0}, {1, 2, 2.0}, {1, 3, 1.0}};
  t.covered = {2, 3};
  return t;
}

/// Tree using the direct source-destination link for node 2:
/// edges {(0,1),(0,2),(1,3)}, energy 7.
inline MulticastTree make_t4b() {
  MulticastTree t;
  t.root = 0;
  t.edges = {{0, 1, 1.0}, {0, 2, 5.0}, {1, 3, 1.0}};
  t.covered = {2, 3};
  return t;
}

/// Context matching the worked fixture numbers: ages (10, 5) for nodes 2 and
/// 3, lambda 0.1, budget 3, hop normalizer 2.
inline TreeEpisodeContext make_g4_ctx() {
  TreeEpisodeContext ctx;
  ctx.selected = {2, 3};
  ctx.aoi = Eigen::VectorXd::Zero(4);
  ctx.aoi(2) = 10.0;
  ctx.aoi(3) = 5.0;
  ctx.weights = Eigen::VectorXd::Zero(4);
  ctx.weights(2) = 0.6;
  ctx.weights(3) = 0.4;
  ctx.lambda = 0.1;
  ctx.budget = 3.0;
  ctx.hop_norm = 2;
  return ctx;
}

/// Every spanning tree of the source's component, as edge-index subsets.
/// Caller guarantees a small graph.
inline void enumerate_spanning_trees(
    const NetworkGraph& g, const std::vector<int>& component,
    std::vector<std::vector<Edge>>& out) {
  const auto& all = g.edges();
  std::vector<Edge> usable;
  std::set<int> comp(component.begin(), component.end());
  for (const Edge& e : all)
    if (comp.count(e.u) && comp.count(e.v)) usable.push_back(e);
  const int need = static_cast<int>(component.size()) - 1;
  if (need < 0) return;
  std::vector<int> pick;
  // choose `need` edges out of usable, keep the acyclic connected ones
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == need) {
      // union-find acyclicity + connectivity over the component
      std::vector<int> parent(g.node_count());
      for (int i = 0; i < g.node_count(); ++i) parent[i] = i;
      std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
      };
      for (int idx : pick) {
        const Edge& e = usable[idx];
        int a = find(e.u), b = find(e.v);
        if (a == b) return;  // cycle
        parent[a] = b;
      }
      const int rep = find(component.front());
      for (int v : component)
        if (find(v) != rep) return;
      std::vector<Edge> tree;
      for (int idx : pick) tree.push_back(usable[idx]);
      out.push_back(std::move(tree));
      return;
    }
    for (int i = start; i < static_cast<int>(usable.size()); ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
}

/// Nodes reachable from `from`, ascending.
inline std::vector<int> component_of(const NetworkGraph& g, int from) {
  std::vector<int> hops = shortest_hops(g, from);
  std::vector<int> comp;
  for (int v = 0; v < g.node_count(); ++v)
    if (hops[v] != kUnreachable) comp.push_back(v);
  return comp;
}

}  // namespace aoicast::testing
