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

#include "aoicast/tree_mdp.hpp"

#include <algorithm>
#include <cassert>

namespace aoicast {

PartialSolution::PartialSolution(const NetworkGraph* g, int root)
    : graph_(g), root_(root) {
  const int n = g->node_count();
  in_tree_.assign(n, 0);
  parent_.assign(n, -1);
  hops_.assign(n, -1);
  in_tree_[root] = 1;
  hops_[root] = 0;
  nodes_.push_back(root);
}

int PartialSolution::hops(int v) const {
  if (v < 0 || v >= static_cast<int>(in_tree_.size()) || !in_tree_[v])
    throw std::domain_error("PartialSolution::hops: node not in tree");
  return hops_[v];
}

Edge PartialSolution::cheapest_link(int v) const {
  if (in_tree_[v])
    throw std::invalid_argument("cheapest_link: node already in tree");
  int best = -1;
  double best_cost = 0.0;
  // neighbors are sorted ascending, so the first strict improvement also
  // realizes the smaller-id tie rule
  for (const auto& [w, cost] : graph_->neighbors(v)) {
    if (!in_tree_[w]) continue;
    if (best < 0 || cost < best_cost) {
      best = w;
      best_cost = cost;
    }
  }
  if (best < 0)
    throw std::invalid_argument("cheapest_link: node not adjacent to tree");
  return Edge{std::min(best, v), std::max(best, v), best_cost};
}

void PartialSolution::add(int v) {
  const Edge link = cheapest_link(v);
  const int anchor = link.u == v ? link.v : link.u;
  in_tree_[v] = 1;
  parent_[v] = anchor;
  hops_[v] = hops_[anchor] + 1;
  nodes_.push_back(v);
  edges_.push_back(link);
  energy_ += link.cost;
#ifndef NDEBUG
  // cross-check the incremental hop cache against a fresh tree traversal
  MulticastTree t;
  t.root = root_;
  t.edges = edges_;
  for (int x : nodes_) assert(tree_hops(t, x) == hops_[x]);
#endif
}

MulticastTree PartialSolution::to_tree(const std::vector<int>& selected) const {
  MulticastTree t;
  t.root = root_;
  t.edges = edges_;
  t.covered = selected;
  std::sort(t.covered.begin(), t.covered.end());
  return t;
}

PartialSolution init_partial(const NetworkGraph& g) {
  return PartialSolution(&g, g.source());
}

std::vector<int> valid_actions(const PartialSolution& p) {
  std::vector<char> seen(p.graph().node_count(), 0);
  std::vector<int> out;
  for (int u : p.nodes()) {
    for (const auto& [v, cost] : p.graph().neighbors(u)) {
      (void)cost;
      if (!p.contains(v) && !seen[v]) {
        seen[v] = 1;
        out.push_back(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PartialSolution attach(const PartialSolution& p, int v) {
  PartialSolution next = p;
  next.add(v);
  return next;
}

double quality(const PartialSolution& p, const TreeEpisodeContext& ctx) {
  if (ctx.hop_norm < 1)
    throw std::invalid_argument("quality: hop_norm must be >= 1");
  double value = 0.0;
  for (int u : ctx.selected) {
    if (!p.contains(u)) continue;
    const double frac = static_cast<double>(p.hops(u)) / ctx.hop_norm;
    value += ctx.weights[u] * (1.0 - frac) * ctx.aoi[u];
  }
  value -= ctx.lambda * (p.energy() - ctx.budget);
  return value;
}

double step_reward(const PartialSolution& before, const PartialSolution& after,
                   const TreeEpisodeContext& ctx) {
  return quality(after, ctx) - quality(before, ctx);
}

bool is_terminal(const PartialSolution& p, const TreeEpisodeContext& ctx) {
  bool all_covered = true;
  for (int u : ctx.selected)
    if (!p.contains(u)) {
      all_covered = false;
      break;
    }
  if (all_covered) return true;
  const std::vector<int> reach = shortest_hops(p.graph(), p.root());
  for (int u : ctx.selected) {
    if (!p.contains(u) && reach[u] == kUnreachable) return true;  // failure
  }
  return false;
}

RolloutResult rollout(const NetworkGraph& g, const TreeEpisodeContext& ctx,
                      const TreePolicy& policy, Rng& rng) {
  RolloutResult result;
  PartialSolution p = init_partial(g);
  result.initial_quality = quality(p, ctx);
  while (!is_terminal(p, ctx)) {
    const std::vector<int> actions = valid_actions(p);
    const int choice = policy(p, actions, rng);
    if (std::find(actions.begin(), actions.end(), choice) == actions.end())
      throw std::invalid_argument("rollout: policy chose an invalid action");
    PartialSolution next = attach(p, choice);
    const double r = step_reward(p, next, ctx);
    result.steps.push_back(RolloutStep{choice, r});
    result.cumulative_reward += r;
    p = std::move(next);
  }
  result.final_quality = quality(p, ctx);
  bool all_covered = true;
  for (int u : ctx.selected)
    if (!p.contains(u)) all_covered = false;
  if (all_covered) {
    result.tree = p.to_tree(ctx.selected);
  } else {
    result.failed = true;
    for (int u : ctx.selected)
      if (!p.contains(u)) result.cumulative_reward -= ctx.weights[u] * ctx.aoi[u];
  }
  return result;
}

namespace {

/// Quality of an explicit tree (same objective as the partial-solution form).
double tree_quality(const MulticastTree& t, const TreeEpisodeContext& ctx) {
  double value = 0.0;
  for (int u : ctx.selected) {
    const double frac = static_cast<double>(tree_hops(t, u)) / ctx.hop_norm;
    value += ctx.weights[u] * (1.0 - frac) * ctx.aoi[u];
  }
  value -= ctx.lambda * (tree_energy(t) - ctx.budget);
  return value;
}

}  // namespace

std::pair<MulticastTree, double> brute_force_best_tree(
    const NetworkGraph& g, const TreeEpisodeContext& ctx) {
  const int n = g.node_count();
  if (n > 12)
    throw CapacityError("brute_force_best_tree: supports at most 12 nodes, got " +
                        std::to_string(n));
  const int root = g.source();
  const std::vector<int> reach = shortest_hops(g, root);
  for (int u : ctx.selected) {
    if (reach[u] == kUnreachable)
      throw std::domain_error(
          "brute_force_best_tree: destination " + std::to_string(u) +
          " unreachable from the source");
  }

  std::vector<char> terminal(n, 0);
  terminal[root] = 1;
  for (int u : ctx.selected) terminal[u] = 1;
  std::vector<int> free_nodes;
  for (int i = 0; i < n; ++i)
    if (!terminal[i]) free_nodes.push_back(i);

  bool found = false;
  MulticastTree best;
  double best_value = 0.0;

  const int free_count = static_cast<int>(free_nodes.size());
  for (int mask = 0; mask < (1 << free_count); ++mask) {
    std::vector<char> in_set(n, 0);
    std::vector<int> set_nodes;
    for (int i = 0; i < n; ++i)
      if (terminal[i]) {
        in_set[i] = 1;
        set_nodes.push_back(i);
      }
    for (int b = 0; b < free_count; ++b)
      if (mask & (1 << b)) {
        in_set[free_nodes[b]] = 1;
        set_nodes.push_back(free_nodes[b]);
      }
    std::sort(set_nodes.begin(), set_nodes.end());
    const int want_edges = static_cast<int>(set_nodes.size()) - 1;

    std::vector<Edge> pool;
    for (const Edge& e : g.edges())
      if (in_set[e.u] && in_set[e.v]) pool.push_back(e);
    const int pool_size = static_cast<int>(pool.size());
    if (pool_size < want_edges) continue;

    // iterate over all want_edges-sized subsets of the pool
    std::vector<int> pick(want_edges);
    for (int i = 0; i < want_edges; ++i) pick[i] = i;
    while (true) {
      std::vector<Edge> candidate;
      candidate.reserve(want_edges);
      for (int i : pick) candidate.push_back(pool[i]);
      // the candidate must be a tree spanning exactly set_nodes
      std::vector<int> touched;
      touched.push_back(root);
      for (const Edge& e : candidate) {
        touched.push_back(e.u);
        touched.push_back(e.v);
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      if (touched == set_nodes && is_multicast_tree(candidate, g, ctx.selected)) {
        MulticastTree t;
        t.root = root;
        t.edges = candidate;
        t.covered = ctx.selected;
        std::sort(t.covered.begin(), t.covered.end());
        const double value = tree_quality(t, ctx);
        if (!found || value > best_value) {
          found = true;
          best = t;
          best_value = value;
        }
      }
      if (want_edges == 0) break;
      int i = want_edges - 1;
      while (i >= 0 && pick[i] == pool_size - want_edges + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < want_edges; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  if (!found)
    throw std::domain_error("brute_force_best_tree: no spanning structure found");
  return {best, best_value};
}

}  // namespace aoicast
