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

#include "aoicast/sched_mdp.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aoicast {

SchedState build_state(const SimState& s) {
  SchedState out;
  out.graph = s.graph;
  const int n = s.graph.node_count();
  out.features = Eigen::MatrixXd::Zero(n, kSchedFeatureDim);
  std::vector<int> in_flight_count(n, 0);
  for (const Packet& p : s.in_flight) in_flight_count[p.dest] += 1;
  for (int i = 0; i < n; ++i) {
    switch (s.graph.role(i)) {
      case NodeRole::Source:
        out.features(i, 0) = 1.0;
        break;
      case NodeRole::Router:
        out.features(i, 1) = 1.0;
        break;
      case NodeRole::Destination:
        out.features(i, 2) = 1.0;
        out.features(i, 3) = s.graph.weight(i);
        out.features(i, 4) = s.aoi[i];
        break;
    }
    out.features(i, 5) = in_flight_count[i];
  }
  return out;
}

namespace {

double gaussian_entropy(double sigma) {
  return std::log(sigma) + 0.5 * (1.0 + std::log(2.0 * M_PI));
}

double gaussian_log_density_scalar(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -std::log(sigma) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
}

}  // namespace

SelectionOutcome sample_selection(const std::vector<DestScore>& scores,
                                  SelectionMode mode, Rng& rng) {
  SelectionOutcome out;
  for (const DestScore& d : scores) {
    if (!(d.sigma > 0.0))
      throw std::invalid_argument("sample_selection: sigma must be > 0");
    const double score =
        mode == SelectionMode::Stochastic ? rng.normal(d.mu, d.sigma) : d.mu;
    out.scores.push_back(score);
    out.log_prob += gaussian_log_density_scalar(score, d.mu, d.sigma);
    out.entropy += gaussian_entropy(d.sigma);
    if (score > 0.0) out.selected.push_back(d.dest);
  }
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

double reward_r1(const std::vector<double>& tree_rewards) {
  return std::accumulate(tree_rewards.begin(), tree_rewards.end(), 0.0);
}

}  // namespace aoicast
