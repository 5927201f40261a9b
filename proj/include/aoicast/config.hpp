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

namespace aoicast {

/// Flat experiment configuration.  Serialized as `key = value` lines; every
/// field round-trips exactly through serialize_config / parse_config.
struct ExperimentConfig {
  // Dataset and topology.
  std::string dataset = "er";  // er | ba | ingest
  int nodes = 60;
  double dest_fraction = 0.3;
  int train_graphs = 240;
  int test_graphs = 60;
  double er_p = 0.25;
  int ba_m = 2;
  double cost_min = 0.5;
  double cost_max = 2.0;

  // Simulation horizon and dynamics.
  int slots = 100;               // evaluation horizon per cell
  int resample_period = 20;      // evaluation-time topology redraw period
  int train_resample_period = 0; // 0 keeps training topologies static
  double initial_aoi = 0.0;

  // Network architecture.
  int embed_dim = 64;
  int heads = 5;
  int layers = 3;
  int head_hidden = 64;
  double dropout = 0.3;
  double leaky_slope = 0.2;
  std::string attention = "sym";  // sym | softmax

  // Trainer.
  double gamma_sched = 0.99;
  double gamma_tree = 0.99;
  double lr_sched_actor = 2e-6;
  double lr_sched_critic = 8e-7;
  double lr_tree_actor = 1e-6;
  double lr_tree_critic = 4e-7;
  double entropy_coef = 0.01;
  double grad_clip = 0.5;
  int schedule_t0 = 2;
  int schedule_t_mult = 10;
  double schedule_eta_min = 1e-8;
  double lambda_init = 0.05;
  double lambda_lr = 1e-5;
  int lambda_interval = 100;
  std::string lagrange_mode = "dual";  // dual | literal
  int sched_interval = 20;
  int tree_interval = 1;
  std::int64_t train_slots = 24000;  // total training budget
  int graph_slots = 100;             // slots per graph visit (round robin)

  // Experiment sweep.
  double c_bar = 4.0;
  std::vector<double> c_bar_list = {3.0, 4.0, 5.0, 6.0, 7.0};
  std::uint64_t seed = 1;
  int eval_seeds = 5;
  std::string eval_selection = "stochastic";  // stochastic | greedy
  std::string algo = "tgms";  // tgms | tgms-mlp | random | greedy | mst
  double greedy_fraction = 0.5;  // greedy baseline's selection fraction
};

/// Paper-scale defaults (the struct's initializers).
ExperimentConfig default_config();

/// Laptop-scale profile: 20-node graphs, 24 train / 6 test, a 2000-slot
/// training budget, and learning rates rescaled for the shorter horizon.
ExperimentConfig desk_config();

std::string serialize_config(const ExperimentConfig& cfg);

/// Parses `key = value` lines ('#' starts a comment).  Unknown keys and
/// malformed values throw std::invalid_argument with the line number.
ExperimentConfig parse_config(const std::string& text);

/// Applies one key=value override in place (used for CLI flags).
void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value);

}  // namespace aoicast
