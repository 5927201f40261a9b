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

#include <Eigen/Core>
#include <vector>

#include "aoicast/graph.hpp"
#include "aoicast/rng.hpp"

namespace aoicast {

/// Iteration failed to reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

/// Parameters of one attention layer.  w_embed mixes neighbor embeddings,
/// w_edge lifts edge features, w_feat lifts raw node features, attn scores
/// pairs.  The aggregation is scaled by 1/||w_embed|| (spectral norm).
struct GatParams {
  Eigen::MatrixXd w_embed;  // d x d
  Eigen::MatrixXd w_edge;   // d x edge_feat_dim
  Eigen::MatrixXd w_feat;   // d x node_feat_dim
  Eigen::VectorXd attn;     // d
  double leaky_slope = 0.2;
};

/// Softmax normalizes each row over the closed neighborhood; Sym rescales
/// the positive scores symmetrically (Sinkhorn rounds) toward the doubly
/// stochastic matrix with the same support, keeping the coefficients
/// symmetric with row sums at most one.  Equal column sums are what make
/// the layer update nonexpansive for the summed-difference distance.
enum class AttentionMode { Softmax, Sym };

/// Per-edge feature vectors aligned with g.edges(); self-pairs use zeros.
std::vector<Eigen::VectorXd> edge_cost_features(const NetworkGraph& g);

/// Pair score: attn . LeakyReLU(w_embed (h_i + h_j) + w_edge e_ij).
double attention_logit(const GatParams& p, const Eigen::VectorXd& h_i,
                       const Eigen::VectorXd& h_j, const Eigen::VectorXd& e_ij);

/// Dense n x n coefficient matrix; zero where no edge (diagonal = self term).
Eigen::MatrixXd attention_coeffs(const GatParams& p, const Eigen::MatrixXd& h,
                                 const std::vector<Eigen::VectorXd>& edge_feats,
                                 const NetworkGraph& g, AttentionMode mode);

/// One embedding update:
///   out_i = (1/||w_embed||) sum_{j in N_i + i} alpha_ij (w_embed h_j + w_feat x_j).
Eigen::MatrixXd gat_layer(const GatParams& p, const Eigen::MatrixXd& h,
                          const Eigen::MatrixXd& x,
                          const std::vector<Eigen::VectorXd>& edge_feats,
                          const NetworkGraph& g, AttentionMode mode);

/// Distance between embedding matrices: ||sum_i (h_i - h'_i)||_2.
/// A pseudometric: distinct embeddings can sit at distance zero.
double embedding_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct ContractionReport {
  int trials = 0;
  int violations = 0;
  double max_ratio = 0.0;        // d(f(H),f(H')) / d(H,H') over useful trials
  double worst_excess = 0.0;     // max d(f(H),f(H')) - d(H,H')
  bool ok = true;
};

/// Draws `trials` random embedding pairs and verifies
/// d(f(H,x), f(H',x)) <= d(H,H') + tol for the layer map.
ContractionReport contraction_check(const GatParams& p,
                                    const Eigen::MatrixXd& x,
                                    const std::vector<Eigen::VectorXd>& edge_feats,
                                    const NetworkGraph& g, AttentionMode mode,
                                    int trials, Rng& rng, double tol = 1e-9);

struct FixedPointResult {
  Eigen::MatrixXd embedding;
  int iterations = 0;
  double residual = 0.0;
};

/// Iterates h <- gat_layer(p, h, x, ...) until the embedding distance between
/// successive iterates drops to tol.  Throws ConvergenceError after
/// max_iters.  Intended for Sym attention, where the map is non-expansive.
FixedPointResult fixed_point_iterate(const GatParams& p,
                                     const Eigen::MatrixXd& h0,
                                     const Eigen::MatrixXd& x,
                                     const std::vector<Eigen::VectorXd>& edge_feats,
                                     const NetworkGraph& g, AttentionMode mode,
                                     double tol, int max_iters = 500);

}  // namespace aoicast
