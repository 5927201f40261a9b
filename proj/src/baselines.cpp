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

#include "aoicast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "aoicast/tree_mdp.hpp"

namespace aoicast {
namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

bool all_contained(const PartialSolution& p, const std::vector<int>& nodes) {
  for (int u : nodes)
    if (!p.contains(u)) return false;
  return true;
}

TreeEpisodeContext plain_context(const NetworkGraph& g,
                                 const std::vector<int>& selected) {
  TreeEpisodeContext ctx;
  ctx.selected = selected;
  ctx.aoi = Eigen::VectorXd::Zero(g.node_count());
  ctx.weights = Eigen::VectorXd::Zero(g.node_count());
  ctx.hop_norm = 1;
  return ctx;
}

}  // namespace

SlotDecision random_policy(const NetworkGraph& g,
                           const std::vector<int>& dests, Rng& rng) {
  SlotDecision d;
  const double f = rng.uniform();
  for (int u : dests)
    if (rng.uniform() < f) d.selected.push_back(u);
  if (d.selected.empty()) return d;
  TreeEpisodeContext ctx = plain_context(g, d.selected);
  RolloutResult r = rollout(
      g, ctx,
      [](const PartialSolution&, const std::vector<int>& acts, Rng& rr) {
        return acts[rr.uniform_int(0, static_cast<int>(acts.size()) - 1)];
      },
      rng);
  if (!r.failed && r.tree) d.tree = *r.tree;
  return d;
}

SlotDecision greedy_policy(const NetworkGraph& g,
                           const std::vector<int>& dests,
                           const Eigen::VectorXd& aoi, double fraction) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("greedy_policy: fraction outside [0,1]");
  SlotDecision d;
  const int k = static_cast<int>(
      std::ceil(fraction * static_cast<double>(dests.size())));
  if (k == 0) return d;
  std::vector<int> ranked = dests;
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    const double wa = g.weight(a) * aoi(a);
    const double wb = g.weight(b) * aoi(b);
    if (wa != wb) return wa > wb;
    return a < b;
  });
  ranked.resize(std::min<std::size_t>(ranked.size(), k));
  std::sort(ranked.begin(), ranked.end());
  d.selected = ranked;

  PartialSolution p = init_partial(g);
  while (!all_contained(p, d.selected)) {
    std::vector<int> acts = valid_actions(p);
    if (acts.empty()) return d;  // some selected destination unreachable
    int best = -1;
    Edge best_link{};
    for (int v : acts) {
      const Edge link = p.cheapest_link(v);
      const bool better =
          best < 0 || link.cost < best_link.cost ||
          (link.cost == best_link.cost &&
           (link.u < best_link.u ||
            (link.u == best_link.u && link.v < best_link.v)));
      if (better) {
        best = v;
        best_link = link;
      }
    }
    p.add(best);
  }
  d.tree = p.to_tree(d.selected);
  return d;
}

MulticastTree kruskal_mst(const NetworkGraph& g) {
  std::vector<Edge> sorted = g.edges();
  std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  DisjointSets dsu(g.node_count());
  std::vector<Edge> accepted;
  for (const Edge& e : sorted)
    if (dsu.unite(e.u, e.v)) accepted.push_back(e);

  // Keep the source's component only.
  const int root = g.source();
  std::vector<std::vector<int>> adj(g.node_count());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    adj[accepted[i].u].push_back(static_cast<int>(i));
    adj[accepted[i].v].push_back(static_cast<int>(i));
  }
  std::vector<char> node_seen(g.node_count(), 0);
  std::vector<char> edge_seen(accepted.size(), 0);
  std::queue<int> q;
  q.push(root);
  node_seen[root] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int ei : adj[u]) {
      if (edge_seen[ei]) continue;
      edge_seen[ei] = 1;
      const Edge& e = accepted[ei];
      const int other = e.u == u ? e.v : e.u;
      if (!node_seen[other]) {
        node_seen[other] = 1;
        q.push(other);
      }
    }
  }
  MulticastTree t;
  t.root = root;
  for (std::size_t i = 0; i < accepted.size(); ++i)
    if (edge_seen[i]) t.edges.push_back(accepted[i]);
  for (int u : g.destinations())
    if (node_seen[u]) t.covered.push_back(u);
  return t;
}

MulticastTree prune_to_targets(const MulticastTree& t,
                               const std::vector<int>& targets) {
  int max_node = t.root;
  for (const Edge& e : t.edges) max_node = std::max({max_node, e.u, e.v});
  std::vector<std::vector<std::pair<int, const Edge*>>> adj(max_node + 1);
  for (const Edge& e : t.edges) {
    adj[e.u].push_back({e.v, &e});
    adj[e.v].push_back({e.u, &e});
  }
  std::vector<int> parent(max_node + 1, -1);
  std::vector<char> seen(max_node + 1, 0);
  std::queue<int> q;
  q.push(t.root);
  seen[t.root] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const auto& [v, e] : adj[u]) {
      (void)e;
      if (!seen[v]) {
        seen[v] = 1;
        parent[v] = u;
        q.push(v);
      }
    }
  }
  std::vector<char> keep(max_node + 1, 0);
  keep[t.root] = 1;
  MulticastTree out;
  out.root = t.root;
  for (int target : targets) {
    if (target > max_node || !seen[target]) continue;
    out.covered.push_back(target);
    for (int v = target; !keep[v]; v = parent[v]) keep[v] = 1;
  }
  std::sort(out.covered.begin(), out.covered.end());
  for (const Edge& e : t.edges)
    if (keep[e.u] && keep[e.v] &&
        (parent[e.u] == e.v || parent[e.v] == e.u))
      out.edges.push_back(e);
  return out;
}

SlotDecision RandomPolicy::decide(const SimState& sim, Rng& rng) {
  return random_policy(sim.graph, sim.graph.destinations(), rng);
}

SlotDecision GreedyPolicy::decide(const SimState& sim, Rng& rng) {
  (void)rng;
  return greedy_policy(sim.graph, sim.graph.destinations(), sim.aoi,
                       fraction_);
}

SlotDecision MstPolicy::decide(const SimState& sim, Rng& rng) {
  (void)rng;
  SlotDecision d;
  MulticastTree mst = kruskal_mst(sim.graph);
  if (mst.covered.empty()) return d;
  d.selected = mst.covered;
  d.tree = prune_to_targets(mst, mst.covered);
  return d;
}

SlotDecision TgmsPolicy::decide(const SimState& sim, Rng& rng) {
  SlotDecision d;
  const NetworkGraph& g = sim.graph;
  SchedState st = build_state(sim);
  Tape tape;
  SchedulerOut out = sched_->forward(tape, st, nullptr);
  const Mat& mu = tape.value(out.mu);
  const Mat& sigma = tape.value(out.sigma);
  std::vector<DestScore> scores;
  scores.reserve(out.dests.size());
  for (std::size_t i = 0; i < out.dests.size(); ++i)
    scores.push_back({out.dests[i], mu(static_cast<Eigen::Index>(i), 0),
                      sigma(static_cast<Eigen::Index>(i), 0)});
  SelectionOutcome sel = sample_selection(scores, mode_, rng);
  d.selected = sel.selected;
  if (d.selected.empty()) return d;

  TreeEpisodeContext ctx = plain_context(g, d.selected);
  ctx.aoi = sim.aoi;
  for (int u : g.destinations()) ctx.weights(u) = g.weight(u);
  ctx.hop_norm = std::max(1, graph_length(g));

  PartialSolution p = init_partial(g);
  while (!is_terminal(p, ctx)) {
    Tape step_tape;
    TreeGenOut tout = tree_->forward(step_tape, p, ctx, nullptr);
    const Mat& logp = step_tape.value(tout.log_probs);
    const int a = mode_ == SelectionMode::Greedy
                      ? argmax_masked_row(logp, tout.valid)
                      : sample_masked_row(logp, tout.valid, rng);
    p = attach(p, a);
  }
  if (all_contained(p, d.selected)) d.tree = p.to_tree(d.selected);
  return d;
}

}  // namespace aoicast
