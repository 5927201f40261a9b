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
#include <vector>

#include "aoicast/rng.hpp"
#include "aoicast/sim.hpp"

namespace aoicast {

/// Number of per-node scheduler features: role one-hot (3), destination
/// weight, current age, in-flight packets addressed to the node.
constexpr int kSchedFeatureDim = 6;

/// Observation handed to the scheduler: the working topology plus one
/// feature row per node.
struct SchedState {
  NetworkGraph graph;
  Eigen::MatrixXd features;  // node_count x kSchedFeatureDim
};

/// Builds the observation from the simulator.  Non-destination nodes carry
/// zero weight and zero age.
SchedState build_state(const SimState& s);

/// Per-destination Gaussian score head output.
struct DestScore {
  int dest = -1;
  double mu = 0.0;
  double sigma = 1.0;
};

/// Result of drawing the per-slot destination subset.
struct SelectionOutcome {
  std::vector<int> selected;      // destination ids with score > 0, sorted
  std::vector<double> scores;     // sampled (or mean) score per destination
  double log_prob = 0.0;          // sum of per-destination log densities
  double entropy = 0.0;           // sum of per-destination Gaussian entropies
};

enum class SelectionMode { Stochastic, Greedy };

/// Stochastic mode draws score_u ~ N(mu_u, sigma_u) and selects score > 0;
/// greedy mode uses score_u = mu_u.  Throws std::invalid_argument when some
/// sigma <= 0.
SelectionOutcome sample_selection(const std::vector<DestScore>& scores,
                                  SelectionMode mode, Rng& rng);

/// Scheduler reward: plain sum of the invoked episode's step rewards.
double reward_r1(const std::vector<double>& tree_rewards);

}  // namespace aoicast
