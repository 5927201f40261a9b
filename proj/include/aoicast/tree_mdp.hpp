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

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "aoicast/graph.hpp"
#include "aoicast/rng.hpp"

namespace aoicast {

/// Requested problem size exceeds what exhaustive enumeration supports.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tree under construction: starts as the bare source and grows one node per
/// step, each new node attached through its cheapest link into the current
/// node set (ties break toward the smaller neighbor id).
class PartialSolution {
 public:
  PartialSolution() = default;
  PartialSolution(const NetworkGraph* g, int root);

  const NetworkGraph& graph() const { return *graph_; }
  int root() const { return root_; }
  bool contains(int v) const { return in_tree_[v]; }
  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int hops(int v) const;  // root distance inside the tree
  double energy() const { return energy_; }

  /// Cheapest link from the tree to v (v must be adjacent to the tree);
  /// among equal costs the smaller neighbor id wins.
  Edge cheapest_link(int v) const;
  void add(int v);  // attach v through cheapest_link(v)

  /// Terminal partial as a MulticastTree covering `selected`.
  MulticastTree to_tree(const std::vector<int>& selected) const;

 private:
  const NetworkGraph* graph_ = nullptr;
  int root_ = -1;
  std::vector<char> in_tree_;
  std::vector<int> parent_;
  std::vector<int> hops_;
  std::vector<int> nodes_;
  std::vector<Edge> edges_;
  double energy_ = 0.0;
};

/// Episode context shared across one tree construction: the selected
/// destinations, the age snapshot, weights, the dual price lambda, the
/// energy budget, and the hop normalizer (graph hop diameter, >= 1).
struct TreeEpisodeContext {
  std::vector<int> selected;  // sorted destination ids
  Eigen::VectorXd aoi;        // per node
  Eigen::VectorXd weights;    // per node, zero outside destinations
  double lambda = 0.0;
  double budget = 0.0;        // energy reference in the penalty term
  int hop_norm = 1;           // >= 1
};

/// Bare-source partial solution for the graph.
PartialSolution init_partial(const NetworkGraph& g);

/// Nodes adjacent to the current tree and not yet in it, ascending id.
std::vector<int> valid_actions(const PartialSolution& p);

/// p with v attached through its cheapest link.
PartialSolution attach(const PartialSolution& p, int v);

/// Score of a partial solution:
///   sum over covered selected destinations of
///     weight * (1 - hops/hop_norm) * age  -  lambda * (energy - budget).
double quality(const PartialSolution& p, const TreeEpisodeContext& ctx);

/// quality(after) - quality(before); rewards telescope over an episode.
double step_reward(const PartialSolution& before, const PartialSolution& after,
                   const TreeEpisodeContext& ctx);

/// True when every selected destination is covered (success) or some
/// uncovered selected destination lies outside the source's component
/// (failure; no action can ever reach it).
bool is_terminal(const PartialSolution& p, const TreeEpisodeContext& ctx);

struct RolloutStep {
  int action = -1;
  double reward = 0.0;
};

struct RolloutResult {
  std::optional<MulticastTree> tree;  // empty on failure
  std::vector<RolloutStep> steps;
  double cumulative_reward = 0.0;
  double initial_quality = 0.0;
  double final_quality = 0.0;
  bool failed = false;
};

/// Chooses one of the listed valid actions for the given partial solution.
using TreePolicy =
    std::function<int(const PartialSolution&, const std::vector<int>&, Rng&)>;

/// Runs one episode from the bare source until terminal.  On failure the
/// cumulative reward additionally carries -weight*age for every uncovered
/// selected destination and no tree is produced.
RolloutResult rollout(const NetworkGraph& g, const TreeEpisodeContext& ctx,
                      const TreePolicy& policy, Rng& rng);

/// Exhaustive argmax of the quality objective over every subtree of g that
/// contains the source and all selected destinations.  Supports up to 12
/// nodes; throws CapacityError beyond that and std::domain_error when some
/// selected destination is unreachable.
std::pair<MulticastTree, double> brute_force_best_tree(
    const NetworkGraph& g, const TreeEpisodeContext& ctx);

}  // namespace aoicast
