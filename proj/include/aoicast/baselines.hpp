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

#include <optional>
#include <utility>
#include <vector>

#include "aoicast/graph.hpp"
#include "aoicast/nets.hpp"
#include "aoicast/rng.hpp"
#include "aoicast/sched_mdp.hpp"
#include "aoicast/sim.hpp"

namespace aoicast {

/// What a policy does with one slot: which destinations it serves and the
/// tree it multicasts over (absent when nothing can be served).
struct SlotDecision {
  std::vector<int> selected;
  std::optional<MulticastTree> tree;
};

/// Per-slot decision maker driven by the evaluation loop.  `decide` sees the
/// simulator state (current graph, ages, in-flight packets) and must not
/// mutate it.
class SlotPolicy {
 public:
  virtual ~SlotPolicy() = default;
  virtual SlotDecision decide(const SimState& sim, Rng& rng) = 0;
};

/// Draws one fraction f ~ U[0,1], includes each destination independently
/// with probability f, then grows a tree by uniformly picking valid nodes
/// (each attached through its cheapest link).  No tree when the selection is
/// empty or some selected destination is unreachable.
SlotDecision random_policy(const NetworkGraph& g, const std::vector<int>& dests,
                           Rng& rng);

/// Selects the top ceil(fraction*|dests|) destinations by weight*age (ties
/// to the smaller id), then grows the tree by repeatedly adding the global
/// minimum-cost frontier link until the selection is covered.
SlotDecision greedy_policy(const NetworkGraph& g, const std::vector<int>& dests,
                           const Eigen::VectorXd& aoi, double fraction);

/// Kruskal spanning tree of the source's component (ties by cost, then
/// endpoint ids); covered lists the reachable destinations.
MulticastTree kruskal_mst(const NetworkGraph& g);

/// Drops tree branches that serve none of the targets; the result spans
/// exactly the union of root-to-target paths.
MulticastTree prune_to_targets(const MulticastTree& t,
                               const std::vector<int>& targets);

class RandomPolicy : public SlotPolicy {
 public:
  SlotDecision decide(const SimState& sim, Rng& rng) override;
};

class GreedyPolicy : public SlotPolicy {
 public:
  explicit GreedyPolicy(double fraction) : fraction_(fraction) {}
  SlotDecision decide(const SimState& sim, Rng& rng) override;

 private:
  double fraction_;
};

/// Recomputes the MST on the current topology and multicasts to every
/// reachable destination each slot; the energy budget is ignored.
class MstPolicy : public SlotPolicy {
 public:
  SlotDecision decide(const SimState& sim, Rng& rng) override;
};

/// Learned policy (covers both attention and dense trunk variants via the
/// nets' configuration).  Greedy mode thresholds mean scores and follows
/// argmax tree actions; stochastic mode samples both.
class TgmsPolicy : public SlotPolicy {
 public:
  TgmsPolicy(const SchedulerNet* sched, const TreeGenNet* tree,
             SelectionMode mode)
      : sched_(sched), tree_(tree), mode_(mode) {}
  SlotDecision decide(const SimState& sim, Rng& rng) override;

 private:
  const SchedulerNet* sched_;
  const TreeGenNet* tree_;
  SelectionMode mode_;
};

}  // namespace aoicast
