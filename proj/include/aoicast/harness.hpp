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
#include <string>
#include <vector>

#include "aoicast/config.hpp"
#include "aoicast/graph.hpp"
#include "aoicast/nets.hpp"

namespace aoicast {

constexpr const char* kMetricsHeader =
    "dataset,seed,c_bar,algo,slots,avg_weighted_aoi,weighted_peak_age,"
    "avg_energy,drops";

struct NamedGraph {
  std::string name;  // e.g. "train/g003"
  NetworkGraph graph;
};

/// Loads every `*.graph` file under dir, sorted by filename.
std::vector<NamedGraph> load_graph_dir(const std::string& dir);

/// Writes cfg.train_graphs files under out_dir/train and cfg.test_graphs
/// under out_dir/test, plus a manifest listing them.  Samples are redrawn
/// until every destination is reachable from the source.
void cmd_gen_graphs(const ExperimentConfig& cfg, const std::string& out_dir);

/// Trains on data_dir/train.  Appends to out_dir/train_log.csv (header only
/// when the file is new), keeps the latest checkpoint in out_dir, resumes
/// from resume_dir when nonempty.  slots_this_run < 0 runs the full
/// remaining budget.
void cmd_train(const ExperimentConfig& cfg, const std::string& data_dir,
               const std::string& out_dir, const std::string& resume_dir,
               std::int64_t slots_this_run);

/// Metrics table (header + one row per graph x c_bar x seed) for cfg.algo.
/// The nets are required for tgms / tgms-mlp and ignored otherwise.  Cells
/// run on up to AOI_LAB_WORKERS threads; output order is deterministic.
std::string eval_metrics_csv(const ExperimentConfig& cfg,
                             const std::vector<NamedGraph>& graphs,
                             const SchedulerNet* sched,
                             const TreeGenNet* tree);

/// Evaluates cfg.algo over data_dir/test and writes the CSV to out_csv.
/// checkpoint_dir supplies the nets for learned algorithms.
void cmd_eval(const ExperimentConfig& cfg, const std::string& data_dir,
              const std::string& checkpoint_dir, const std::string& out_csv);

struct OracleRequest {
  std::string graph_file;
  std::vector<int> dests;
  std::vector<double> aoi;  // aligned with dests
  double lambda = 0.0;
  double c_bar = 0.0;
};

/// Prints the exhaustive best tree and objective for the request; reports
/// infeasibility when a destination is unreachable.
void cmd_oracle(const OracleRequest& req, std::ostream& out);

/// Finite-difference check over both full architectures at reduced width,
/// on `points` random smooth parameter draws.  Returns true when every
/// point passes.  `corrupt` deliberately breaks one gradient path to
/// self-test the checker.
bool cmd_gradcheck(std::uint64_t seed, int points, bool corrupt,
                   std::ostream& out);

}  // namespace aoicast
