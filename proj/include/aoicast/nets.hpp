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
#include <string>
#include <vector>

#include "aoicast/gat.hpp"
#include "aoicast/sched_mdp.hpp"
#include "aoicast/tape.hpp"
#include "aoicast/tree_mdp.hpp"

namespace aoicast {

/// Architecture knobs shared by both agents.  mlp_only replaces neighbor
/// attention by per-node dense updates (self pairs only), keeping the rest
/// of the pipeline identical.
struct NetConfig {
  int embed_dim = 64;
  int heads = 5;
  int layers = 3;
  int head_hidden = 64;
  double leaky_slope = 0.2;
  double dropout = 0.3;
  AttentionMode attention = AttentionMode::Sym;
  bool mlp_only = false;
};

/// Number of tree-generator node features: in-tree flag, role one-hot (3),
/// destination weight, age, selected flag.
constexpr int kTreeFeatureDim = 7;
/// Tree-generator edge features: cost, in-tree flag.
constexpr int kTreeEdgeFeatureDim = 2;

Mat treegen_node_features(const PartialSolution& p,
                          const TreeEpisodeContext& ctx);
Mat treegen_edge_features(const PartialSolution& p);

/// Draws a row index from a masked log-probability column; the last valid
/// row absorbs floating-point slack in the total mass.
int sample_masked_row(const Mat& log_probs,
                      const std::vector<std::uint8_t>& valid, Rng& rng);

/// Argmax over valid rows; ties go to the smaller index.
int argmax_masked_row(const Mat& log_probs,
                      const std::vector<std::uint8_t>& valid);

struct SchedulerOut {
  Val mu;     // dest_count x 1
  Val sigma;  // dest_count x 1
  Val value;  // 1 x 1
  std::vector<int> dests;
};

struct TreeGenOut {
  Val log_probs;  // node_count x 1; -inf outside valid actions
  Val value;      // 1 x 1
  std::vector<std::uint8_t> valid;
};

/// Scheduler agent: attention trunk over the slot observation, per
/// destination a Gaussian score head fed by [h_u, pooled], and a pooled
/// state-value head.
class SchedulerNet {
 public:
  explicit SchedulerNet(NetConfig cfg);
  void init_params(std::uint64_t seed);
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const NetConfig& config() const { return cfg_; }
  /// Trunk and score-head parameters (the policy's own).
  std::vector<int> actor_param_indices() const;
  /// Value-head parameters.
  std::vector<int> critic_param_indices() const;

  /// Records the forward pass on the tape.  A non-null dropout_rng enables
  /// head-input dropout at the configured rate (training only).
  SchedulerOut forward(Tape& tape, const SchedState& state,
                       Rng* dropout_rng = nullptr) const;

 private:
  NetConfig cfg_;
  ParamStore store_;
};

/// Tree-generator agent: attention trunk over the partial-solution encoding,
/// a per-node score head normalized over valid attachments, and a pooled
/// state-value head.
class TreeGenNet {
 public:
  explicit TreeGenNet(NetConfig cfg);
  void init_params(std::uint64_t seed);
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const NetConfig& config() const { return cfg_; }
  std::vector<int> actor_param_indices() const;
  std::vector<int> critic_param_indices() const;

  TreeGenOut forward(Tape& tape, const PartialSolution& p,
                     const TreeEpisodeContext& ctx,
                     Rng* dropout_rng = nullptr) const;

 private:
  NetConfig cfg_;
  ParamStore store_;
};

}  // namespace aoicast
