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

#include "aoicast/config.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aoicast {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double_str(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad real value '" + s + "'");
  return v;
}

long long parse_int_str(const std::string& s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad integer value '" + s + "'");
  return v;
}

/// Calls f(name, member reference) for every field, in serialization order.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("dataset", c.dataset);
  f("nodes", c.nodes);
  f("dest_fraction", c.dest_fraction);
  f("train_graphs", c.train_graphs);
  f("test_graphs", c.test_graphs);
  f("er_p", c.er_p);
  f("ba_m", c.ba_m);
  f("cost_min", c.cost_min);
  f("cost_max", c.cost_max);
  f("slots", c.slots);
  f("resample_period", c.resample_period);
  f("train_resample_period", c.train_resample_period);
  f("initial_aoi", c.initial_aoi);
  f("embed_dim", c.embed_dim);
  f("heads", c.heads);
  f("layers", c.layers);
  f("head_hidden", c.head_hidden);
  f("dropout", c.dropout);
  f("leaky_slope", c.leaky_slope);
  f("attention", c.attention);
  f("gamma_sched", c.gamma_sched);
  f("gamma_tree", c.gamma_tree);
  f("lr_sched_actor", c.lr_sched_actor);
  f("lr_sched_critic", c.lr_sched_critic);
  f("lr_tree_actor", c.lr_tree_actor);
  f("lr_tree_critic", c.lr_tree_critic);
  f("entropy_coef", c.entropy_coef);
  f("grad_clip", c.grad_clip);
  f("schedule_t0", c.schedule_t0);
  f("schedule_t_mult", c.schedule_t_mult);
  f("schedule_eta_min", c.schedule_eta_min);
  f("lambda_init", c.lambda_init);
  f("lambda_lr", c.lambda_lr);
  f("lambda_interval", c.lambda_interval);
  f("lagrange_mode", c.lagrange_mode);
  f("sched_interval", c.sched_interval);
  f("tree_interval", c.tree_interval);
  f("train_slots", c.train_slots);
  f("graph_slots", c.graph_slots);
  f("c_bar", c.c_bar);
  f("c_bar_list", c.c_bar_list);
  f("seed", c.seed);
  f("eval_seeds", c.eval_seeds);
  f("eval_selection", c.eval_selection);
  f("algo", c.algo);
  f("greedy_fraction", c.greedy_fraction);
}

struct Writer {
  std::ostringstream out;
  void operator()(const char* name, const std::string& v) {
    out << name << " = " << v << "\n";
  }
  void operator()(const char* name, int v) {
    out << name << " = " << v << "\n";
  }
  void operator()(const char* name, std::int64_t v) {
    out << name << " = " << v << "\n";
  }
  void operator()(const char* name, std::uint64_t v) {
    out << name << " = " << v << "\n";
  }
  void operator()(const char* name, double v) {
    out << name << " = " << format_double(v) << "\n";
  }
  void operator()(const char* name, const std::vector<double>& v) {
    out << name << " = ";
    for (std::size_t i = 0; i < v.size(); ++i)
      out << (i ? "," : "") << format_double(v[i]);
    out << "\n";
  }
};

struct Assigner {
  const std::string& key;
  const std::string& value;
  bool matched = false;

  void operator()(const char* name, std::string& v) {
    if (key == name) { v = value; matched = true; }
  }
  void operator()(const char* name, int& v) {
    if (key == name) { v = static_cast<int>(parse_int_str(value)); matched = true; }
  }
  void operator()(const char* name, std::int64_t& v) {
    if (key == name) { v = parse_int_str(value); matched = true; }
  }
  void operator()(const char* name, std::uint64_t& v) {
    if (key == name) {
      v = static_cast<std::uint64_t>(parse_int_str(value));
      matched = true;
    }
  }
  void operator()(const char* name, double& v) {
    if (key == name) { v = parse_double_str(value); matched = true; }
  }
  void operator()(const char* name, std::vector<double>& v) {
    if (key != name) return;
    std::vector<double> parsed;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) parsed.push_back(parse_double_str(item));
    }
    v = std::move(parsed);
    matched = true;
  }
};

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.nodes = 20;
  c.train_graphs = 24;
  c.test_graphs = 6;
  c.train_slots = 2000;
  c.embed_dim = 32;
  c.head_hidden = 32;
  // The short horizon needs proportionally larger steps than the
  // paper-scale rates to show any movement at all.
  c.lr_sched_actor = 2e-3;
  c.lr_sched_critic = 8e-4;
  c.lr_tree_actor = 1e-3;
  c.lr_tree_critic = 4e-4;
  c.lambda_lr = 5e-3;
  c.lambda_interval = 20;
  return c;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  Writer w;
  visit_fields(cfg, w);
  return w.out.str();
}

void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value) {
  Assigner a{key, value};
  visit_fields(cfg, a);
  if (!a.matched)
    throw std::invalid_argument("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_override(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

}  // namespace aoicast
