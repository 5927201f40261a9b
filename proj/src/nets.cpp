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

#include "aoicast/nets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace aoicast {
namespace {

/// Directed neighbor pairs with a leading self pair per node, ordered by
/// source id.  Self pairs have no underlying edge.
struct PairList {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<std::uint8_t> is_self;
};

PairList build_pairs(const NetworkGraph& g, bool self_only) {
  PairList p;
  for (int i = 0; i < g.node_count(); ++i) {
    p.src.push_back(i);
    p.dst.push_back(i);
    p.is_self.push_back(1);
    if (self_only) continue;
    for (const auto& [j, cost] : g.neighbors(i)) {
      (void)cost;
      p.src.push_back(i);
      p.dst.push_back(j);
      p.is_self.push_back(0);
    }
  }
  return p;
}

std::string layer_name(const std::string& prefix, int layer, int head,
                       const char* part) {
  return prefix + ".l" + std::to_string(layer) + ".h" + std::to_string(head) +
         "." + part;
}

void register_trunk(ParamStore& store, const NetConfig& cfg,
                    const std::string& prefix, int feat_dim, int edge_dim) {
  store.add(prefix + ".proj", cfg.embed_dim, feat_dim);
  for (int l = 0; l < cfg.layers; ++l) {
    for (int h = 0; h < cfg.heads; ++h) {
      store.add(layer_name(prefix, l, h, "embed"), cfg.embed_dim,
                cfg.embed_dim);
      store.add(layer_name(prefix, l, h, "edge"), cfg.embed_dim, edge_dim);
      store.add(layer_name(prefix, l, h, "feat"), cfg.embed_dim, feat_dim);
      store.add(layer_name(prefix, l, h, "attn"), cfg.embed_dim, 1);
    }
  }
}

void register_head(ParamStore& store, const std::string& name, int in_dim,
                   int hidden) {
  store.add(name + ".in", hidden, in_dim);
  store.add(name + ".out", 1, hidden);
}

void xavier_init(ParamStore& store, std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < store.size(); ++i) {
    Mat& w = store.value(i);
    const double limit =
        std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        w(r, c) = rng.uniform(-limit, limit);
  }
}

Mat dropout_mask(int rows, int cols, double rate, Rng& rng) {
  const double keep = 1.0 - rate;
  Mat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      m(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return m;
}

Val maybe_dropout(Tape& tape, Val v, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return v;
  const Mat& val = tape.value(v);
  return tape.cmul(v, tape.constant(dropout_mask(
                          static_cast<int>(val.rows()),
                          static_cast<int>(val.cols()), rate, *rng)));
}

/// Fixed number of symmetric scaling rounds in sym attention.  A fixed count
/// keeps the recorded computation smooth for finite-difference checks; the
/// rounds converge geometrically, so twelve reach working precision.
constexpr int kTapeSinkhornRounds = 12;

/// One attention layer on the tape.  Messages aggregate as
///   sum_j alpha_ij (W_embed h_j + W_feat x_j) / ||W_embed||_2
/// with alpha from the edge-aware logits, normalized per row (softmax) or
/// scaled symmetrically toward the doubly stochastic matrix (sym), which is
/// what keeps the layer nonexpansive.  A constant shift of the logits keeps
/// exp() in range without changing alpha.
Val attention_layer(Tape& tape, ParamStore& store, const NetConfig& cfg,
                    const std::string& prefix, int layer, Val h, Val feats,
                    const PairList& pairs, const Mat& pair_feats) {
  const int n = static_cast<int>(tape.value(h).rows());
  Val pooled{};
  for (int k = 0; k < cfg.heads; ++k) {
    Val w_embed = tape.param(store, layer_name(prefix, layer, k, "embed"));
    Val w_edge = tape.param(store, layer_name(prefix, layer, k, "edge"));
    Val w_feat = tape.param(store, layer_name(prefix, layer, k, "feat"));
    Val attn = tape.param(store, layer_name(prefix, layer, k, "attn"));

    Val s = tape.mul_nt(h, w_embed);
    Val msg = tape.add(s, tape.mul_nt(feats, w_feat));
    Val pair_pre =
        tape.add(tape.add(tape.gather_rows(s, pairs.src),
                          tape.gather_rows(s, pairs.dst)),
                 tape.mul_nt(tape.constant(pair_feats), w_edge));
    Val phi =
        tape.mul(tape.leaky_relu(pair_pre, cfg.leaky_slope), attn);  // P x 1
    const double shift = tape.value(phi).maxCoeff();
    Val ex = tape.exp(tape.add_const(phi, -shift));
    Val alpha{};
    if (cfg.attention == AttentionMode::Sym) {
      alpha = ex;
      for (int round = 0; round < kTapeSinkhornRounds; ++round) {
        Val row = tape.segment_sum(alpha, pairs.src, n);  // n x 1
        Val inv = tape.exp(tape.scale(tape.log(row), -0.5));
        alpha = tape.cmul(alpha,
                          tape.cmul(tape.gather_rows(inv, pairs.src),
                                    tape.gather_rows(inv, pairs.dst)));
      }
    } else {
      Val mass = tape.segment_sum(ex, pairs.src, n);  // n x 1
      alpha = tape.cdiv(ex, tape.gather_rows(mass, pairs.src));
    }
    Val agg = tape.segment_sum(
        tape.scale_rows(tape.gather_rows(msg, pairs.dst), alpha), pairs.src,
        n);
    // With an identically zero embed matrix the aggregate is zero as well;
    // skip the normalization instead of dividing zero by zero.
    const std::string embed_name = layer_name(prefix, layer, k, "embed");
    if (spectral_norm_value(store.value(embed_name)) > 0.0)
      agg = tape.div_by_scalar(agg, tape.spectral_norm(w_embed));
    pooled = k == 0 ? agg : tape.add(pooled, agg);
  }
  return tape.scale(pooled, 1.0 / cfg.heads);
}

Val trunk_forward(Tape& tape, ParamStore& store, const NetConfig& cfg,
                  const std::string& prefix, const Mat& features,
                  const Mat& pair_feats, const PairList& pairs) {
  Val x = tape.constant(features);
  Val h = tape.mul_nt(x, tape.param(store, prefix + ".proj"));
  for (int l = 0; l < cfg.layers; ++l)
    h = attention_layer(tape, store, cfg, prefix, l, h, x, pairs, pair_feats);
  return h;
}

/// Two-layer head: in -> hidden -> LeakyReLU -> scalar per row.
Val head_forward(Tape& tape, ParamStore& store, const NetConfig& cfg,
                 const std::string& name, Val in) {
  Val hidden = tape.leaky_relu(
      tape.mul_nt(in, tape.param(store, name + ".in")), cfg.leaky_slope);
  return tape.mul_nt(hidden, tape.param(store, name + ".out"));
}

std::vector<int> indices_matching(const ParamStore& store,
                                  const std::string& value_prefix,
                                  bool want_value) {
  std::vector<int> out;
  for (int i = 0; i < store.size(); ++i) {
    const bool is_value = store.name(i).rfind(value_prefix, 0) == 0;
    if (is_value == want_value) out.push_back(i);
  }
  return out;
}

}  // namespace

int sample_masked_row(const Mat& log_probs,
                      const std::vector<std::uint8_t>& valid, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (!valid[i]) continue;
    last = static_cast<int>(i);
    cum += std::exp(log_probs(static_cast<Eigen::Index>(i), 0));
    if (u < cum) return last;
  }
  return last;
}

int argmax_masked_row(const Mat& log_probs,
                      const std::vector<std::uint8_t>& valid) {
  int best = -1;
  double best_v = 0.0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (!valid[i]) continue;
    const double v = log_probs(static_cast<Eigen::Index>(i), 0);
    if (best < 0 || v > best_v) {
      best = static_cast<int>(i);
      best_v = v;
    }
  }
  return best;
}

Mat treegen_node_features(const PartialSolution& p,
                          const TreeEpisodeContext& ctx) {
  const NetworkGraph& g = p.graph();
  const int n = g.node_count();
  Mat f = Mat::Zero(n, kTreeFeatureDim);
  std::set<int> selected(ctx.selected.begin(), ctx.selected.end());
  for (int v = 0; v < n; ++v) {
    f(v, 0) = p.contains(v) ? 1.0 : 0.0;
    switch (g.role(v)) {
      case NodeRole::Source: f(v, 1) = 1.0; break;
      case NodeRole::Router: f(v, 2) = 1.0; break;
      case NodeRole::Destination: f(v, 3) = 1.0; break;
    }
    f(v, 4) = g.weight(v);
    f(v, 5) = ctx.aoi.size() > v ? ctx.aoi(v) : 0.0;
    f(v, 6) = selected.count(v) ? 1.0 : 0.0;
  }
  return f;
}

Mat treegen_edge_features(const PartialSolution& p) {
  const NetworkGraph& g = p.graph();
  std::set<std::pair<int, int>> in_tree;
  for (const Edge& e : p.edges()) in_tree.insert({e.u, e.v});
  Mat f(static_cast<Eigen::Index>(g.edges().size()), kTreeEdgeFeatureDim);
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const Edge& e = g.edges()[i];
    f(static_cast<Eigen::Index>(i), 0) = e.cost;
    f(static_cast<Eigen::Index>(i), 1) = in_tree.count({e.u, e.v}) ? 1.0 : 0.0;
  }
  return f;
}

SchedulerNet::SchedulerNet(NetConfig cfg) : cfg_(cfg) {
  register_trunk(store_, cfg_, "sched", kSchedFeatureDim, 1);
  register_head(store_, "sched.mu", 2 * cfg_.embed_dim, cfg_.head_hidden);
  register_head(store_, "sched.sigma", 2 * cfg_.embed_dim, cfg_.head_hidden);
  register_head(store_, "sched.value", cfg_.embed_dim, cfg_.head_hidden);
}

void SchedulerNet::init_params(std::uint64_t seed) {
  xavier_init(store_, seed);
}

std::vector<int> SchedulerNet::actor_param_indices() const {
  return indices_matching(store_, "sched.value.", false);
}

std::vector<int> SchedulerNet::critic_param_indices() const {
  return indices_matching(store_, "sched.value.", true);
}

SchedulerOut SchedulerNet::forward(Tape& tape, const SchedState& state,
                                   Rng* dropout_rng) const {
  const NetworkGraph& g = state.graph;
  PairList pairs = build_pairs(g, cfg_.mlp_only);
  Mat pair_feats = Mat::Zero(static_cast<Eigen::Index>(pairs.src.size()), 1);
  for (std::size_t i = 0; i < pairs.src.size(); ++i)
    if (!pairs.is_self[i])
      pair_feats(static_cast<Eigen::Index>(i), 0) =
          g.edge_cost(pairs.src[i], pairs.dst[i]);

  ParamStore& store = const_cast<ParamStore&>(store_);
  Val h = trunk_forward(tape, store, cfg_, "sched", state.features, pair_feats,
                        pairs);
  Val pooled = tape.mean_rows(h);  // 1 x d

  SchedulerOut out;
  out.dests = g.destinations();
  const int m = static_cast<int>(out.dests.size());
  Val dest_h = tape.gather_rows(h, out.dests);
  Val z = tape.concat_cols(dest_h, tape.repeat_rows(pooled, m));
  z = maybe_dropout(tape, z, cfg_.dropout, dropout_rng);
  Val pooled_in = maybe_dropout(tape, pooled, cfg_.dropout, dropout_rng);

  out.mu = head_forward(tape, store, cfg_, "sched.mu", z);
  Val raw = head_forward(tape, store, cfg_, "sched.sigma", z);
  out.sigma = tape.exp(tape.clamp(raw, -5.0, 2.0));
  out.value = head_forward(tape, store, cfg_, "sched.value", pooled_in);
  return out;
}

TreeGenNet::TreeGenNet(NetConfig cfg) : cfg_(cfg) {
  register_trunk(store_, cfg_, "tree", kTreeFeatureDim, kTreeEdgeFeatureDim);
  register_head(store_, "tree.policy", cfg_.embed_dim, cfg_.head_hidden);
  register_head(store_, "tree.value", cfg_.embed_dim, cfg_.head_hidden);
}

void TreeGenNet::init_params(std::uint64_t seed) { xavier_init(store_, seed); }

std::vector<int> TreeGenNet::actor_param_indices() const {
  return indices_matching(store_, "tree.value.", false);
}

std::vector<int> TreeGenNet::critic_param_indices() const {
  return indices_matching(store_, "tree.value.", true);
}

TreeGenOut TreeGenNet::forward(Tape& tape, const PartialSolution& p,
                               const TreeEpisodeContext& ctx,
                               Rng* dropout_rng) const {
  const NetworkGraph& g = p.graph();
  PairList pairs = build_pairs(g, cfg_.mlp_only);
  Mat undirected = treegen_edge_features(p);
  Mat pair_feats = Mat::Zero(static_cast<Eigen::Index>(pairs.src.size()),
                             kTreeEdgeFeatureDim);
  if (!cfg_.mlp_only) {
    std::map<std::pair<int, int>, int> edge_index;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      const Edge& e = g.edges()[i];
      edge_index[{e.u, e.v}] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < pairs.src.size(); ++i) {
      if (pairs.is_self[i]) continue;
      const int a = std::min(pairs.src[i], pairs.dst[i]);
      const int b = std::max(pairs.src[i], pairs.dst[i]);
      pair_feats.row(static_cast<Eigen::Index>(i)) =
          undirected.row(edge_index.at({a, b}));
    }
  }

  Mat features = treegen_node_features(p, ctx);
  ParamStore& store = const_cast<ParamStore&>(store_);
  Val h =
      trunk_forward(tape, store, cfg_, "tree", features, pair_feats, pairs);

  TreeGenOut out;
  std::vector<int> actions = valid_actions(p);
  out.valid.assign(g.node_count(), 0);
  for (int v : actions) out.valid[v] = 1;

  Val h_in = maybe_dropout(tape, h, cfg_.dropout, dropout_rng);
  Val logits = head_forward(tape, store, cfg_, "tree.policy", h_in);
  out.log_probs = tape.masked_log_softmax(logits, out.valid);

  Val pooled = tape.mean_rows(h);
  Val pooled_in = maybe_dropout(tape, pooled, cfg_.dropout, dropout_rng);
  out.value = head_forward(tape, store, cfg_, "tree.value", pooled_in);
  return out;
}

}  // namespace aoicast
