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

#include "aoicast/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace aoicast {
namespace {

constexpr double kPi = std::numbers::pi;

std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("bad real literal: " + s);
  return v;
}

void write_mat(std::ofstream& out, const Mat& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

void read_mat(std::ifstream& in, Mat& m) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
}

}  // namespace

double cosine_lr(std::int64_t step, double base, const CosineSchedule& s) {
  if (s.t0 <= 0 || s.t_mult < 1)
    throw std::invalid_argument("cosine_lr: bad schedule parameters");
  std::int64_t period = s.t0;
  std::int64_t t = step;
  if (s.t_mult == 1) {
    t = step % period;
  } else {
    while (t >= period) {
      t -= period;
      period *= s.t_mult;
    }
  }
  const double progress = static_cast<double>(t) / static_cast<double>(period);
  return s.eta_min +
         (base - s.eta_min) * 0.5 * (1.0 + std::cos(kPi * progress));
}

CenteredAdam::CenteredAdam(const ParamStore& store, std::vector<int> subset,
                           AdamConfig cfg, CosineSchedule sched)
    : cfg_(cfg), sched_(sched), subset_(std::move(subset)) {
  m_.reserve(subset_.size());
  v_.reserve(subset_.size());
  gavg_.reserve(subset_.size());
  for (int idx : subset_) {
    const Mat& w = store.value(idx);
    m_.push_back(Mat::Zero(w.rows(), w.cols()));
    v_.push_back(Mat::Zero(w.rows(), w.cols()));
    gavg_.push_back(Mat::Zero(w.rows(), w.cols()));
  }
}

double CenteredAdam::current_lr() const {
  return cosine_lr(t_, cfg_.lr, sched_);
}

double CenteredAdam::step(ParamStore& store) {
  const double norm = store.grad_norm(subset_);
  const double scale =
      (norm > cfg_.grad_clip && norm > 0.0) ? cfg_.grad_clip / norm : 1.0;
  const double applied = std::min(norm, cfg_.grad_clip);
  const double lr = current_lr();
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < subset_.size(); ++i) {
    const int idx = subset_[i];
    const Mat g = store.grad(idx) * scale;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    gavg_[i] = cfg_.beta2 * gavg_[i] + (1.0 - cfg_.beta2) * g;
    const Mat mhat = m_[i] / bc1;
    // Centered second moment from the raw averages, then debiased.  Debiasing
    // v and gavg individually would cancel exactly on the first step (the
    // update would divide by eps alone and overshoot by ~1/eps).
    const Mat vc = (v_[i] - gavg_[i].cwiseProduct(gavg_[i]))
                       .cwiseMax(0.0)
                       .eval() /
                   bc2;
    store.value(idx).array() -=
        lr * mhat.array() / (vc.array().sqrt() + cfg_.eps);
  }
  store.bump_version();
  return applied;
}

void CenteredAdam::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "aoicast-adam 1\n" << "t " << t_ << "\n"
      << "n " << subset_.size() << "\n";
  for (const Mat& m : m_) out << m.rows() << " " << m.cols() << "\n";
  out << "payload\n";
  for (const Mat& m : m_) write_mat(out, m);
  for (const Mat& m : v_) write_mat(out, m);
  for (const Mat& m : gavg_) write_mat(out, m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void CenteredAdam::load(const std::string& path, const ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "aoicast-adam" || version != 1)
    throw std::runtime_error("bad optimizer file: " + path);
  std::string key;
  std::size_t n = 0;
  in >> key >> t_;
  if (key != "t") throw std::runtime_error("bad optimizer file: " + path);
  in >> key >> n;
  if (key != "n" || n != subset_.size())
    throw std::runtime_error("optimizer/parameter subset mismatch: " + path);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index rows = 0, cols = 0;
    in >> rows >> cols;
    const Mat& w = store.value(subset_[i]);
    if (rows != w.rows() || cols != w.cols())
      throw std::runtime_error("optimizer shape mismatch: " + path);
  }
  in >> key;
  if (key != "payload")
    throw std::runtime_error("bad optimizer file: " + path);
  in.get();  // consume the newline before the binary payload
  for (Mat& m : m_) read_mat(in, m);
  for (Mat& m : v_) read_mat(in, m);
  for (Mat& m : gavg_) read_mat(in, m);
  if (!in) throw std::runtime_error("truncated optimizer file: " + path);
}

ReturnsAdvantages compute_returns_and_advantages(const Episode& ep,
                                                 double gamma) {
  ReturnsAdvantages ra;
  const std::size_t n = ep.steps.size();
  ra.returns.resize(n, 0.0);
  ra.advantages.resize(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc = ep.steps[i].reward + gamma * acc;
    ra.returns[i] = acc;
    ra.advantages[i] = acc - ep.tape->value(ep.steps[i].value)(0, 0);
  }
  return ra;
}

StepStats actor_step(Episode& ep, const ReturnsAdvantages& ra,
                     ParamStore& store, CenteredAdam& opt,
                     double entropy_coef) {
  StepStats st;
  st.lr = opt.current_lr();
  if (ep.steps.empty()) {
    st.applied = true;
    return st;
  }
  Tape& tape = *ep.tape;
  Val acc{};
  double entropy_total = 0.0;
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    Val term = tape.scale(ep.steps[i].log_prob, ra.advantages[i]);
    if (entropy_coef != 0.0)
      term = tape.add(term, tape.scale(ep.steps[i].entropy, entropy_coef));
    acc = i == 0 ? term : tape.add(acc, term);
    entropy_total += tape.value(ep.steps[i].entropy)(0, 0);
  }
  Val loss = tape.scale(acc, -1.0);
  st.loss = tape.value(loss)(0, 0);
  st.entropy = entropy_total / static_cast<double>(ep.steps.size());
  if (!std::isfinite(st.loss)) return st;
  store.zero_grads();
  tape.backward(loss);
  const double norm = store.grad_norm(opt.subset());
  if (!std::isfinite(norm)) {
    store.zero_grads();
    return st;
  }
  st.grad_norm = opt.step(store);
  store.zero_grads();
  st.applied = true;
  return st;
}

StepStats critic_step(Episode& ep, const ReturnsAdvantages& ra,
                      ParamStore& store, CenteredAdam& opt) {
  StepStats st;
  st.lr = opt.current_lr();
  if (ep.steps.empty()) {
    st.applied = true;
    return st;
  }
  Tape& tape = *ep.tape;
  Val acc{};
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    Val diff = tape.add_const(ep.steps[i].value, -ra.returns[i]);
    Val sq = tape.cmul(diff, diff);
    acc = i == 0 ? sq : tape.add(acc, sq);
  }
  st.loss = tape.value(acc)(0, 0);
  if (!std::isfinite(st.loss)) return st;
  store.zero_grads();
  tape.backward(acc);
  const double norm = store.grad_norm(opt.subset());
  if (!std::isfinite(norm)) {
    store.zero_grads();
    return st;
  }
  st.grad_norm = opt.step(store);
  store.zero_grads();
  st.applied = true;
  return st;
}

LagrangeState lagrange_step(const LagrangeState& ls, double c_bar, double lr,
                            LagrangeMode mode) {
  const double avg = ls.slots_accum > 0
                         ? ls.energy_accum / static_cast<double>(ls.slots_accum)
                         : 0.0;
  LagrangeState out;
  if (mode == LagrangeMode::Dual)
    out.lambda = std::max(0.0, ls.lambda + lr * (avg - c_bar));
  else
    out.lambda = std::max(0.0, avg - c_bar);
  return out;
}

NetConfig net_config_from(const ExperimentConfig& cfg, bool mlp_only) {
  NetConfig nc;
  nc.embed_dim = cfg.embed_dim;
  nc.heads = cfg.heads;
  nc.layers = cfg.layers;
  nc.head_hidden = cfg.head_hidden;
  nc.dropout = cfg.dropout;
  nc.leaky_slope = cfg.leaky_slope;
  if (cfg.attention == "sym")
    nc.attention = AttentionMode::Sym;
  else if (cfg.attention == "softmax")
    nc.attention = AttentionMode::Softmax;
  else
    throw std::invalid_argument("unknown attention mode '" + cfg.attention +
                                "'");
  nc.mlp_only = mlp_only;
  return nc;
}

namespace {

/// Log-density and entropy of the per-destination Gaussian score draw,
/// assembled on the tape from the head outputs.
struct TapedSelection {
  Val log_prob;
  Val entropy;
};

TapedSelection taped_selection_terms(Tape& tape, const SchedulerOut& out,
                                     const std::vector<double>& sampled) {
  const int m = static_cast<int>(sampled.size());
  Mat x(m, 1);
  for (int i = 0; i < m; ++i) x(i, 0) = sampled[i];
  Val diff = tape.sub(tape.constant(x), out.mu);
  Val z = tape.cdiv(diff, out.sigma);
  Val zz = tape.cmul(z, z);
  Val logsig = tape.log(out.sigma);
  Val neg = tape.sum(tape.add(logsig, tape.scale(zz, 0.5)));
  const double c = 0.5 * std::log(2.0 * kPi);
  TapedSelection t;
  t.log_prob = tape.add_const(tape.scale(neg, -1.0), -c * m);
  t.entropy = tape.add_const(tape.sum(logsig), m * 0.5 * (1.0 + std::log(2.0 * kPi)));
  return t;
}

/// Entropy of the masked categorical, over the valid rows only.
Val taped_categorical_entropy(Tape& tape, Val log_probs,
                              const std::vector<std::uint8_t>& valid) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < valid.size(); ++i)
    if (valid[i]) ids.push_back(static_cast<int>(i));
  Val lv = tape.gather_rows(log_probs, ids);
  Val pv = tape.exp(lv);
  return tape.scale(tape.sum(tape.cmul(pv, lv)), -1.0);
}

}  // namespace

struct Trainer::Snapshot {
  std::vector<Mat> sched_values;
  std::vector<Mat> tree_values;
  CenteredAdam opt_sched_actor, opt_sched_critic;
  CenteredAdam opt_tree_actor, opt_tree_critic;
  LagrangeState lagrange;
  std::int64_t global_slot = 0;
  std::int64_t graph_cursor = 0;
};

Trainer::Trainer(ExperimentConfig cfg, std::vector<NetworkGraph> graphs)
    : cfg_(std::move(cfg)),
      graphs_(std::move(graphs)),
      sched_net_(net_config_from(cfg_, cfg_.algo == "tgms-mlp")),
      tree_net_(net_config_from(cfg_, cfg_.algo == "tgms-mlp")),
      rng_(mix_seed(cfg_.seed, 201)) {
  if (graphs_.empty())
    throw std::invalid_argument("trainer: empty graph set");
  for (const NetworkGraph& g : graphs_) {
    g.validate();
    if (g.destinations().empty())
      throw std::invalid_argument("trainer: graph without destinations");
  }
  sched_net_.init_params(mix_seed(cfg_.seed, 101));
  tree_net_.init_params(mix_seed(cfg_.seed, 102));
  const CosineSchedule sched{cfg_.schedule_t0, cfg_.schedule_t_mult,
                             cfg_.schedule_eta_min};
  AdamConfig a;
  a.beta1 = 0.9;
  a.grad_clip = cfg_.grad_clip;
  a.lr = cfg_.lr_sched_actor;
  opt_sched_actor_ =
      CenteredAdam(sched_net_.params(), sched_net_.actor_param_indices(), a,
                   sched);
  a.lr = cfg_.lr_sched_critic;
  opt_sched_critic_ =
      CenteredAdam(sched_net_.params(), sched_net_.critic_param_indices(), a,
                   sched);
  a.lr = cfg_.lr_tree_actor;
  opt_tree_actor_ = CenteredAdam(tree_net_.params(),
                                 tree_net_.actor_param_indices(), a, sched);
  a.lr = cfg_.lr_tree_critic;
  opt_tree_critic_ = CenteredAdam(tree_net_.params(),
                                  tree_net_.critic_param_indices(), a, sched);
  lagrange_.lambda = cfg_.lambda_init;
}

Trainer::Snapshot Trainer::take_snapshot() const {
  Snapshot s;
  for (int i = 0; i < sched_net_.params().size(); ++i)
    s.sched_values.push_back(sched_net_.params().value(i));
  for (int i = 0; i < tree_net_.params().size(); ++i)
    s.tree_values.push_back(tree_net_.params().value(i));
  s.opt_sched_actor = opt_sched_actor_;
  s.opt_sched_critic = opt_sched_critic_;
  s.opt_tree_actor = opt_tree_actor_;
  s.opt_tree_critic = opt_tree_critic_;
  s.lagrange = lagrange_;
  s.global_slot = global_slot_;
  s.graph_cursor = graph_cursor_;
  return s;
}

void Trainer::restore_snapshot(const Snapshot& s) {
  for (int i = 0; i < sched_net_.params().size(); ++i)
    sched_net_.params().value(i) = s.sched_values[i];
  for (int i = 0; i < tree_net_.params().size(); ++i)
    tree_net_.params().value(i) = s.tree_values[i];
  sched_net_.params().bump_version();
  tree_net_.params().bump_version();
  opt_sched_actor_ = s.opt_sched_actor;
  opt_sched_critic_ = s.opt_sched_critic;
  opt_tree_actor_ = s.opt_tree_actor;
  opt_tree_critic_ = s.opt_tree_critic;
  lagrange_ = s.lagrange;
  global_slot_ = s.global_slot;
  graph_cursor_ = s.graph_cursor;
}

void Trainer::run(std::int64_t slot_budget, const std::string& out_dir,
                  std::ostream& log) {
  const std::int64_t target =
      std::min(global_slot_ + slot_budget, cfg_.train_slots);
  if (!out_dir.empty() && global_slot_ == 0) save_checkpoint(out_dir);
  while (global_slot_ < target) {
    const std::int64_t visit =
        std::min<std::int64_t>(cfg_.graph_slots, target - global_slot_);
    Snapshot snap = take_snapshot();
    bool incident = false;
    run_visit(visit, log, incident);
    if (incident) {
      restore_snapshot(snap);
      ++incidents_;
      if (incidents_ > 64)
        throw std::runtime_error("training diverged repeatedly; giving up");
      rng_ = Rng(mix_seed(cfg_.seed, 500 + static_cast<std::uint64_t>(
                                              incidents_)));
      continue;
    }
    ++graph_cursor_;
    if (!out_dir.empty()) save_checkpoint(out_dir);
  }
}

void Trainer::update_scheduler(Episode& ep, std::ostream& log,
                               bool& incident) {
  if (ep.steps.empty()) return;
  ReturnsAdvantages ra = compute_returns_and_advantages(ep, cfg_.gamma_sched);
  StepStats sa = actor_step(ep, ra, sched_net_.params(), opt_sched_actor_,
                            cfg_.entropy_coef);
  StepStats sc =
      critic_step(ep, ra, sched_net_.params(), opt_sched_critic_);
  if (!sa.applied || !sc.applied) {
    incident = true;
    return;
  }
  double r1_sum = 0.0;
  for (const EpisodeStep& s : ep.steps) r1_sum += s.reward;
  const double avg_energy =
      lagrange_.slots_accum > 0
          ? lagrange_.energy_accum / static_cast<double>(lagrange_.slots_accum)
          : 0.0;
  log << global_slot_ << ",sched," << format_value(sa.loss) << ','
      << format_value(sc.loss) << ',' << format_value(sa.entropy) << ','
      << format_value(sa.grad_norm) << ',' << format_value(sa.lr) << ','
      << format_value(lagrange_.lambda) << ',' << format_value(avg_energy)
      << ',' << format_value(r1_sum / static_cast<double>(ep.steps.size()))
      << '\n';
}

void Trainer::run_visit(std::int64_t visit_len, std::ostream& log,
                        bool& incident) {
  const NetworkGraph& base =
      graphs_[static_cast<std::size_t>(graph_cursor_) % graphs_.size()];
  const bool dynamic =
      cfg_.train_resample_period > 0 && cfg_.dataset != "ingest";
  TopologyProcess proc;
  if (dynamic) {
    proc.base = base;
    proc.kind = generator_kind_from(cfg_.dataset);
    proc.resample_period = cfg_.train_resample_period;
    proc.er_p = cfg_.er_p;
    proc.ba_m = cfg_.ba_m;
    proc.cost_min = cfg_.cost_min;
    proc.cost_max = cfg_.cost_max;
    proc.seed = mix_seed(cfg_.seed, 700 + static_cast<std::uint64_t>(
                                             graph_cursor_));
  }
  SimState sim = init_state(base, cfg_.initial_aoi);
  MetricsTrace trace;
  Episode window;
  Rng* drop = cfg_.dropout > 0.0 ? &rng_ : nullptr;

  for (std::int64_t k = 0; k < visit_len; ++k) {
    if (dynamic && k > 0 && k % cfg_.train_resample_period == 0)
      set_graph(sim, resample_topology(proc, static_cast<int>(k)));
    const NetworkGraph& cur = sim.graph;
    SchedState st = build_state(sim);
    Tape& tape = *window.tape;
    SchedulerOut out = sched_net_.forward(tape, st, drop);
    const Mat& muv = tape.value(out.mu);
    const Mat& sgv = tape.value(out.sigma);
    std::vector<DestScore> scores;
    scores.reserve(out.dests.size());
    for (std::size_t i = 0; i < out.dests.size(); ++i)
      scores.push_back({out.dests[i], muv(static_cast<Eigen::Index>(i), 0),
                        sgv(static_cast<Eigen::Index>(i), 0)});
    SelectionOutcome sel =
        sample_selection(scores, SelectionMode::Stochastic, rng_);
    TapedSelection taped = taped_selection_terms(tape, out, sel.scores);

    double r1 = 0.0;
    double charged = 0.0;
    if (!sel.selected.empty()) {
      TreeEpisodeContext ctx;
      ctx.selected = sel.selected;
      ctx.aoi = sim.aoi;
      ctx.weights = Eigen::VectorXd::Zero(cur.node_count());
      for (int d : cur.destinations()) ctx.weights(d) = cur.weight(d);
      ctx.lambda = lagrange_.lambda;
      ctx.budget = cfg_.c_bar;
      ctx.hop_norm = std::max(1, graph_length(cur));

      PartialSolution p = init_partial(cur);
      Episode ep;
      while (!is_terminal(p, ctx)) {
        TreeGenOut tout = tree_net_.forward(*ep.tape, p, ctx, drop);
        const int a = sample_masked_row(ep.tape->value(tout.log_probs),
                                        tout.valid, rng_);
        EpisodeStep stp;
        stp.log_prob = ep.tape->gather_rows(tout.log_probs, {a});
        stp.entropy =
            taped_categorical_entropy(*ep.tape, tout.log_probs, tout.valid);
        stp.value = tout.value;
        PartialSolution next = attach(p, a);
        stp.reward = step_reward(p, next, ctx);
        ep.steps.push_back(stp);
        p = std::move(next);
      }
      bool success = true;
      for (int u : ctx.selected)
        if (!p.contains(u)) success = false;
      for (const EpisodeStep& s : ep.steps) r1 += s.reward;
      if (!success)
        for (int u : ctx.selected)
          if (!p.contains(u)) r1 -= ctx.weights(u) * ctx.aoi(u);

      if (!ep.steps.empty()) {
        ReturnsAdvantages ra =
            compute_returns_and_advantages(ep, cfg_.gamma_tree);
        StepStats sa = actor_step(ep, ra, tree_net_.params(),
                                  opt_tree_actor_, cfg_.entropy_coef);
        StepStats sc =
            critic_step(ep, ra, tree_net_.params(), opt_tree_critic_);
        if (!sa.applied || !sc.applied) {
          incident = true;
          return;
        }
        const double avg_energy =
            lagrange_.slots_accum > 0
                ? lagrange_.energy_accum /
                      static_cast<double>(lagrange_.slots_accum)
                : 0.0;
        log << global_slot_ << ",tree," << format_value(sa.loss) << ','
            << format_value(sc.loss) << ',' << format_value(sa.entropy) << ','
            << format_value(sa.grad_norm) << ',' << format_value(sa.lr) << ','
            << format_value(lagrange_.lambda) << ','
            << format_value(avg_energy) << ',' << format_value(r1) << '\n';
      }

      if (success) {
        MulticastTree tree = p.to_tree(sel.selected);
        charged = tree.energy();
        inject_tree(sim, tree, sel.selected);
      }
    }

    advance_slot(sim, trace);
    window.steps.push_back({taped.log_prob, taped.entropy, out.value, r1});
    lagrange_.energy_accum += charged;
    lagrange_.slots_accum += 1;
    ++global_slot_;

    if (static_cast<int>(window.steps.size()) >= cfg_.sched_interval ||
        k == visit_len - 1) {
      update_scheduler(window, log, incident);
      if (incident) return;
      window = Episode{};
    }
    if (lagrange_.slots_accum >= cfg_.lambda_interval) {
      const LagrangeMode mode = cfg_.lagrange_mode == "literal"
                                    ? LagrangeMode::Literal
                                    : LagrangeMode::Dual;
      lagrange_ = lagrange_step(lagrange_, cfg_.c_bar, cfg_.lambda_lr, mode);
    }
  }
}

void Trainer::save_checkpoint(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  sched_net_.params().save(dir + "/sched_params.bin");
  tree_net_.params().save(dir + "/tree_params.bin");
  opt_sched_actor_.save(dir + "/opt_sched_actor.bin");
  opt_sched_critic_.save(dir + "/opt_sched_critic.bin");
  opt_tree_actor_.save(dir + "/opt_tree_actor.bin");
  opt_tree_critic_.save(dir + "/opt_tree_critic.bin");
  std::ofstream st(dir + "/trainer_state.txt");
  if (!st) throw std::runtime_error("cannot write trainer state in " + dir);
  st << "aoicast-trainer 1\n";
  st << "global_slot " << global_slot_ << "\n";
  st << "graph_cursor " << graph_cursor_ << "\n";
  st << "incidents " << incidents_ << "\n";
  st << "lambda " << hex_double(lagrange_.lambda) << "\n";
  st << "lambda_energy " << hex_double(lagrange_.energy_accum) << "\n";
  st << "lambda_slots " << lagrange_.slots_accum << "\n";
  st << "rng " << rng_.save_state() << "\n";
  if (!st) throw std::runtime_error("write failed in " + dir);
}

void Trainer::load_checkpoint(const std::string& dir) {
  sched_net_.params().load(dir + "/sched_params.bin");
  tree_net_.params().load(dir + "/tree_params.bin");
  opt_sched_actor_.load(dir + "/opt_sched_actor.bin", sched_net_.params());
  opt_sched_critic_.load(dir + "/opt_sched_critic.bin", sched_net_.params());
  opt_tree_actor_.load(dir + "/opt_tree_actor.bin", tree_net_.params());
  opt_tree_critic_.load(dir + "/opt_tree_critic.bin", tree_net_.params());
  std::ifstream st(dir + "/trainer_state.txt");
  if (!st) throw std::runtime_error("cannot read trainer state in " + dir);
  std::string magic;
  int version = 0;
  st >> magic >> version;
  if (magic != "aoicast-trainer" || version != 1)
    throw std::runtime_error("bad trainer state in " + dir);
  std::string key, value;
  while (st >> key) {
    if (key == "rng") {
      std::string rest;
      std::getline(st, rest);
      rng_.load_state(rest);
    } else if (key == "global_slot") {
      st >> global_slot_;
    } else if (key == "graph_cursor") {
      st >> graph_cursor_;
    } else if (key == "incidents") {
      st >> incidents_;
    } else if (key == "lambda") {
      st >> value;
      lagrange_.lambda = parse_hex_double(value);
    } else if (key == "lambda_energy") {
      st >> value;
      lagrange_.energy_accum = parse_hex_double(value);
    } else if (key == "lambda_slots") {
      st >> lagrange_.slots_accum;
    } else {
      throw std::runtime_error("unknown trainer-state key '" + key + "'");
    }
  }
}

}  // namespace aoicast
