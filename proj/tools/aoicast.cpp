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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aoicast/config.hpp"
#include "aoicast/graph.hpp"
#include "aoicast/harness.hpp"
#include "aoicast/tree_mdp.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string profile = "paper";
  std::vector<std::string> sets;
  std::string algo;
  std::vector<double> c_bars;
  int slots = -1;
  std::int64_t seed = -1;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "Config file (flat key = value)");
  sub->add_option("--profile", f.profile, "Baseline profile: paper or desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  sub->add_option("--set", f.sets,
                  "Override a config key, e.g. --set nodes=12 (repeatable)");
  sub->add_option("--algo", f.algo,
                  "Algorithm: tgms, tgms-mlp, random, greedy, mst");
  sub->add_option("--c-bar", f.c_bars,
                  "Energy budget(s); multiple values replace the sweep list");
  sub->add_option("--slots", f.slots, "Slots per evaluated graph");
  sub->add_option("--seed", f.seed, "Base seed");
}

aoicast::ExperimentConfig build_config(const CommonFlags& f) {
  aoicast::ExperimentConfig cfg = f.profile == "desk"
                                      ? aoicast::desk_config()
                                      : aoicast::default_config();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in)
      throw std::invalid_argument("cannot open config file " + f.config_path);
    std::ostringstream text;
    text << in.rdbuf();
    cfg = aoicast::parse_config(text.str());
  }
  for (const std::string& kv : f.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    aoicast::apply_config_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.algo.empty()) cfg.algo = f.algo;
  if (!f.c_bars.empty()) {
    cfg.c_bar_list = f.c_bars;
    cfg.c_bar = f.c_bars.front();
  }
  if (f.slots >= 0) cfg.slots = f.slots;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information multicast scheduling lab"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand(
      "gen-graphs", "Sample train/test graph datasets to a directory");
  add_common(gen, gen_f);
  gen->add_option("--out", gen_out, "Output dataset directory")->required();

  std::string train_data, train_out, train_resume;
  std::int64_t train_slots_run = -1;
  CLI::App* train =
      app.add_subcommand("train", "Train the scheduler/tree-generator pair");
  add_common(train, train_f);
  train->add_option("--data", train_data, "Dataset directory (from gen-graphs)")
      ->required();
  train->add_option("--out", train_out, "Run directory for checkpoints + log")
      ->required();
  train->add_option("--resume", train_resume,
                    "Checkpoint directory to resume from");
  train->add_option("--train-slots", train_slots_run,
                    "Slots to run in this invocation (default: full budget)");

  std::string eval_data, eval_ckpt, eval_out;
  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate an algorithm over the test set");
  add_common(eval, eval_f);
  eval->add_option("--data", eval_data, "Dataset directory")->required();
  eval->add_option("--checkpoint", eval_ckpt,
                   "Checkpoint directory (learned algorithms)");
  eval->add_option("--out", eval_out, "Output metrics CSV path")->required();

  aoicast::OracleRequest oreq;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Exhaustive best multicast tree for one instance");
  oracle->add_option("--graph", oreq.graph_file, "Graph file")->required();
  oracle->add_option("--dests", oreq.dests, "Destination ids")->required();
  oracle->add_option("--aoi", oreq.aoi, "Ages aligned with --dests")
      ->required();
  oracle->add_option("--lambda", oreq.lambda, "Energy multiplier");
  oracle->add_option("--c-bar", oreq.c_bar, "Energy budget");

  std::uint64_t gc_seed = 1;
  int gc_points = 20;
  bool gc_corrupt = false;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference check of both architectures");
  gradcheck->add_option("--seed", gc_seed, "Base seed");
  gradcheck->add_option("--points", gc_points, "Parameter draws to check");
  gradcheck
      ->add_flag("--corrupt-gradients", gc_corrupt,
                 "Break one gradient on purpose (checker self-test)")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
    if (gen->parsed()) {
      aoicast::cmd_gen_graphs(build_config(gen_f), gen_out);
    } else if (train->parsed()) {
      aoicast::cmd_train(build_config(train_f), train_data, train_out,
                         train_resume, train_slots_run);
    } else if (eval->parsed()) {
      aoicast::cmd_eval(build_config(eval_f), eval_data, eval_ckpt, eval_out);
    } else if (oracle->parsed()) {
      aoicast::cmd_oracle(oreq, std::cout);
    } else if (gradcheck->parsed()) {
      if (!aoicast::cmd_gradcheck(gc_seed, gc_points, gc_corrupt, std::cout))
        return 1;
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const aoicast::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const aoicast::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
