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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aoicast/config.hpp"
#include "aoicast/nets.hpp"
#include "aoicast/sched_mdp.hpp"
#include "aoicast/sim.hpp"
#include "aoicast/tape.hpp"
#include "aoicast/tree_mdp.hpp"

namespace aoicast {

/// Cosine-annealed rate with warm restarts; period lengths grow by t_mult
/// after each restart.
struct CosineSchedule {
  int t0 = 2;
  int t_mult = 10;
  double eta_min = 1e-8;
};

/// Rate at optimizer step `step` (0-based).  Never leaves [eta_min, base].
double cosine_lr(std::int64_t step, double base, const CosineSchedule& s);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 0.5;
};

/// Adam with a centered second moment (variance of the gradient rather than
/// its raw second moment) over a fixed subset of a parameter store, stepping
/// the rate along a cosine schedule.
class CenteredAdam {
 public:
  CenteredAdam() = default;
  CenteredAdam(const ParamStore& store, std::vector<int> subset,
               AdamConfig cfg, CosineSchedule sched);

  /// Scales the subset's gradients down to the clip norm if needed, applies
  /// one update at the current scheduled rate, and advances the step count.
  /// Returns the post-clip gradient norm.
  double step(ParamStore& store);
  double current_lr() const;
  std::int64_t steps() const { return t_; }
  const std::vector<int>& subset() const { return subset_; }

  void save(const std::string& path) const;
  void load(const std::string& path, const ParamStore& store);

 private:
  AdamConfig cfg_;
  CosineSchedule sched_;
  std::vector<int> subset_;
  std::vector<Mat> m_;     // first moment
  std::vector<Mat> v_;     // raw second moment
  std::vector<Mat> gavg_;  // gradient mean, for the centered variance
  std::int64_t t_ = 0;
};

/// One action record of an episode; the handles live on the episode's tape.
struct EpisodeStep {
  Val log_prob;  // 1x1
  Val entropy;   // 1x1
  Val value;     // 1x1
  double reward = 0.0;
};

struct Episode {
  std::unique_ptr<Tape> tape = std::make_unique<Tape>();
  std::vector<EpisodeStep> steps;
};

struct ReturnsAdvantages {
  std::vector<double> returns;
  std::vector<double> advantages;
};

/// Discounted reward-to-go per step minus the recorded value estimate.
ReturnsAdvantages compute_returns_and_advantages(const Episode& ep,
                                                 double gamma);

struct StepStats {
  double loss = 0.0;
  double entropy = 0.0;    // mean per step
  double grad_norm = 0.0;  // post-clip
  double lr = 0.0;
  bool applied = false;    // false when skipped on a non-finite loss/gradient
};

/// Policy-gradient ascent on sum_t(log pi_t * A_t + entropy_coef * H_t),
/// clipped and applied through `opt` to its parameter subset.
StepStats actor_step(Episode& ep, const ReturnsAdvantages& ra,
                     ParamStore& store, CenteredAdam& opt,
                     double entropy_coef);

/// Squared-error descent on sum_t(return_t - V_t)^2.
StepStats critic_step(Episode& ep, const ReturnsAdvantages& ra,
                      ParamStore& store, CenteredAdam& opt);

enum class LagrangeMode { Dual, Literal };

struct LagrangeState {
  double lambda = 0.05;
  double energy_accum = 0.0;     // charged energy since the last update
  std::int64_t slots_accum = 0;  // slots since the last update
};

/// Dual mode: lambda <- max(0, lambda + lr*(avg_energy - c_bar)); literal
/// mode overwrites lambda with max(0, avg_energy - c_bar).  Either way the
/// accumulators reset.
LagrangeState lagrange_step(const LagrangeState& ls, double c_bar, double lr,
                            LagrangeMode mode);

/// Maps the flat experiment configuration onto the architecture knobs.
NetConfig net_config_from(const ExperimentConfig& cfg, bool mlp_only);

constexpr const char* kTrainLogHeader =
    "step,agent,loss_actor,loss_critic,entropy,grad_norm,lr,lambda,"
    "avg_energy,avg_r1";

/// Interleaves the two agents over a round-robin of training graphs:
/// the scheduler picks a destination subset each slot and trains on windows
/// of sched_interval slots; every nonempty selection runs one tree episode
/// trained immediately; the dual price updates every lambda_interval slots.
/// Checkpoints land at graph-visit boundaries; a non-finite loss rolls back
/// to the last boundary and reseeds the action stream.
class Trainer {
 public:
  Trainer(ExperimentConfig cfg, std::vector<NetworkGraph> graphs);

  /// Processes up to `slot_budget` further slots (whole graph visits),
  /// bounded by cfg.train_slots in total.  Appends CSV rows (no header) to
  /// `log` and keeps `out_dir/` current when out_dir is nonempty.
  void run(std::int64_t slot_budget, const std::string& out_dir,
           std::ostream& log);

  void save_checkpoint(const std::string& dir) const;
  void load_checkpoint(const std::string& dir);

  SchedulerNet& scheduler() { return sched_net_; }
  TreeGenNet& treegen() { return tree_net_; }
  const SchedulerNet& scheduler() const { return sched_net_; }
  const TreeGenNet& treegen() const { return tree_net_; }
  double lambda() const { return lagrange_.lambda; }
  std::int64_t global_slot() const { return global_slot_; }
  int incidents() const { return incidents_; }

 private:
  struct Snapshot;

  void run_visit(std::int64_t visit_len, std::ostream& log, bool& incident);
  void update_scheduler(Episode& ep, std::ostream& log, bool& incident);
  Snapshot take_snapshot() const;
  void restore_snapshot(const Snapshot& s);

  ExperimentConfig cfg_;
  std::vector<NetworkGraph> graphs_;
  SchedulerNet sched_net_;
  TreeGenNet tree_net_;
  CenteredAdam opt_sched_actor_, opt_sched_critic_;
  CenteredAdam opt_tree_actor_, opt_tree_critic_;
  LagrangeState lagrange_;
  Rng rng_;
  std::int64_t global_slot_ = 0;
  std::int64_t graph_cursor_ = 0;
  int incidents_ = 0;
};

}  // namespace aoicast
