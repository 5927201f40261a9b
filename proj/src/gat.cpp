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

#include "aoicast/gat.hpp"

#include <cmath>

#include "aoicast/tape.hpp"

namespace aoicast {

std::vector<Eigen::VectorXd> edge_cost_features(const NetworkGraph& g) {
  std::vector<Eigen::VectorXd> feats;
  feats.reserve(g.edges().size());
  for (const Edge& e : g.edges()) {
    Eigen::VectorXd f(1);
    f << e.cost;
    feats.push_back(f);
  }
  return feats;
}

double attention_logit(const GatParams& p, const Eigen::VectorXd& h_i,
                       const Eigen::VectorXd& h_j,
                       const Eigen::VectorXd& e_ij) {
  Eigen::VectorXd z = p.w_embed * (h_i + h_j) + p.w_edge * e_ij;
  for (Eigen::Index k = 0; k < z.size(); ++k)
    if (z[k] < 0.0) z[k] *= p.leaky_slope;
  return p.attn.dot(z);
}

namespace {

void check_inputs(const GatParams& p, const Eigen::MatrixXd& h,
                  const std::vector<Eigen::VectorXd>& edge_feats,
                  const NetworkGraph& g) {
  if (h.rows() != g.node_count())
    throw std::invalid_argument("attention: one embedding row per node required");
  if (h.cols() != p.w_embed.cols())
    throw std::invalid_argument("attention: embedding width disagrees with w_embed");
  if (static_cast<int>(edge_feats.size()) != g.edge_count())
    throw std::invalid_argument("attention: one feature per edge required");
}

}  // namespace

Eigen::MatrixXd attention_coeffs(const GatParams& p, const Eigen::MatrixXd& h,
                                 const std::vector<Eigen::VectorXd>& edge_feats,
                                 const NetworkGraph& g, AttentionMode mode) {
  check_inputs(p, h, edge_feats, g);
  const int n = g.node_count();
  const Eigen::VectorXd zero_edge =
      Eigen::VectorXd::Zero(p.w_edge.cols());

  // pair scores phi over the closed neighborhood, symmetric by construction
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i)
    phi(i, i) = attention_logit(p, h.row(i), h.row(i), zero_edge);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edges()[e];
    const double s =
        attention_logit(p, h.row(ed.u), h.row(ed.v), edge_feats[e]);
    phi(ed.u, ed.v) = s;
    phi(ed.v, ed.u) = s;
    nbrs[ed.u].push_back(ed.v);
    nbrs[ed.v].push_back(ed.u);
  }

  // one global shift keeps both normalizations exact and overflow-free
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    shift = std::max(shift, phi(i, i));
    for (int j : nbrs[i]) shift = std::max(shift, phi(i, j));
  }

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) alpha(i, i) = std::exp(phi(i, i) - shift);
  for (int i = 0; i < n; ++i)
    for (int j : nbrs[i]) alpha(i, j) = std::exp(phi(i, j) - shift);

  if (mode == AttentionMode::Softmax) {
    for (int i = 0; i < n; ++i) alpha.row(i) /= alpha.row(i).sum();
    return alpha;
  }

  // Sym: symmetric Sinkhorn scaling toward the doubly stochastic matrix with
  // the same support.  Equal column sums are what make the layer
  // nonexpansive for the summed-difference distance: the sum of the output
  // differences then reduces to w_embed/||w_embed|| applied to the sum of
  // the input differences, independent of the coefficients.  The positive
  // diagonal guarantees total support, so the scaling converges.  Both
  // triangles receive the same computed value, keeping symmetry exact.
  constexpr double kTol = 1e-13;
  constexpr int kMaxRounds = 2000;
  for (int round = 0; round < kMaxRounds; ++round) {
    const Eigen::VectorXd row_sums = alpha.rowwise().sum();
    if (((row_sums.array() - 1.0).abs() <= kTol).all()) break;
    const Eigen::ArrayXd f = row_sums.array().rsqrt();
    for (int i = 0; i < n; ++i) {
      alpha(i, i) *= f(i) * f(i);
      for (int j : nbrs[i])
        if (j > i) {
          const double scaled = alpha(i, j) * (f(i) * f(j));
          alpha(i, j) = scaled;
          alpha(j, i) = scaled;
        }
    }
  }
  return alpha;
}

Eigen::MatrixXd gat_layer(const GatParams& p, const Eigen::MatrixXd& h,
                          const Eigen::MatrixXd& x,
                          const std::vector<Eigen::VectorXd>& edge_feats,
                          const NetworkGraph& g, AttentionMode mode) {
  check_inputs(p, h, edge_feats, g);
  if (x.rows() != g.node_count() || x.cols() != p.w_feat.cols())
    throw std::invalid_argument("gat_layer: node feature shape disagrees with w_feat");
  const double norm = spectral_norm_value(p.w_embed);
  if (!(norm > 0.0))
    throw std::invalid_argument("gat_layer: w_embed must have positive norm");
  const Eigen::MatrixXd alpha = attention_coeffs(p, h, edge_feats, g, mode);
  // per-node message w_embed h_j + w_feat x_j, as rows
  const Eigen::MatrixXd msg =
      h * p.w_embed.transpose() + x * p.w_feat.transpose();
  return (alpha * msg) / norm;
}

double embedding_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("embedding_distance: shape mismatch");
  return (a - b).colwise().sum().norm();
}

ContractionReport contraction_check(const GatParams& p,
                                    const Eigen::MatrixXd& x,
                                    const std::vector<Eigen::VectorXd>& edge_feats,
                                    const NetworkGraph& g, AttentionMode mode,
                                    int trials, Rng& rng, double tol) {
  ContractionReport report;
  const int n = g.node_count();
  const int d = static_cast<int>(p.w_embed.cols());
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd ha(n, d), hb(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        ha(i, j) = rng.normal();
        hb(i, j) = rng.normal();
      }
    const double before = embedding_distance(ha, hb);
    const double after =
        embedding_distance(gat_layer(p, ha, x, edge_feats, g, mode),
                           gat_layer(p, hb, x, edge_feats, g, mode));
    ++report.trials;
    report.worst_excess = std::max(report.worst_excess, after - before);
    if (before > 0.0)
      report.max_ratio = std::max(report.max_ratio, after / before);
    if (after > before + tol) ++report.violations;
  }
  report.ok = report.violations == 0;
  return report;
}

FixedPointResult fixed_point_iterate(const GatParams& p,
                                     const Eigen::MatrixXd& h0,
                                     const Eigen::MatrixXd& x,
                                     const std::vector<Eigen::VectorXd>& edge_feats,
                                     const NetworkGraph& g, AttentionMode mode,
                                     double tol, int max_iters) {
  if (!(tol > 0.0))
    throw std::invalid_argument("fixed_point_iterate: tol must be > 0");
  Eigen::MatrixXd h = h0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::MatrixXd next = gat_layer(p, h, x, edge_feats, g, mode);
    residual = embedding_distance(next, h);
    h = std::move(next);
    if (residual <= tol) return FixedPointResult{std::move(h), it, residual};
  }
  throw ConvergenceError(
      "fixed_point_iterate: residual " + std::to_string(residual) +
          " above tolerance after " + std::to_string(max_iters) + " iterations",
      residual);
}

}  // namespace aoicast
