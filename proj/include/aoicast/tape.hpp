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
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aoicast {

using Mat = Eigen::MatrixXd;

/// Named dense parameters with paired gradient accumulators.  Insertion
/// order is the canonical (checkpoint) order; the version counter advances
/// on every optimizer step.
class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols);
  int index_of(const std::string& name) const;  // -1 when absent
  bool has(const std::string& name) const { return index_of(name) >= 0; }
  int size() const { return static_cast<int>(values_.size()); }

  const std::string& name(int idx) const { return names_[idx]; }
  Mat& value(int idx) { return values_[idx]; }
  const Mat& value(int idx) const { return values_[idx]; }
  Mat& grad(int idx) { return grads_[idx]; }
  const Mat& grad(int idx) const { return grads_[idx]; }
  Mat& value(const std::string& name) { return values_[require(name)]; }
  const Mat& value(const std::string& name) const {
    return values_[require(name)];
  }

  void zero_grads();
  /// Euclidean norm of the gradients of the named subset (all when empty).
  double grad_norm(const std::vector<int>& subset) const;
  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

  /// Binary checkpoint: a text manifest of (name, rows, cols, offset)
  /// followed by the little-endian 64-bit payload.  Round-trips bit-exactly.
  /// Loading into an empty store adopts the file's layout; loading into a
  /// populated store requires the layouts to match and throws otherwise.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  int require(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<Mat> values_;
  std::vector<Mat> grads_;
  std::unordered_map<std::string, int> index_;
  std::uint64_t version_ = 0;
};

class Tape;

/// Handle to a node on a tape.
struct Val {
  Tape* tape = nullptr;
  int id = -1;
};

/// Reverse-mode tape over dense matrices.  Nodes are recorded in forward
/// order; backward replays them exactly once in reverse.  A tape lives for
/// one episode and is discarded after its backward passes.
class Tape {
 public:
  Val constant(Mat value);
  /// Leaf bound to a parameter; backward accumulates into the store's grad.
  Val param(ParamStore& store, int param_idx);
  Val param(ParamStore& store, const std::string& name);

  Val add(Val a, Val b);
  Val sub(Val a, Val b);
  Val mul(Val a, Val b);      // matrix product A * B
  Val mul_nt(Val a, Val b);   // A * B^T
  Val cmul(Val a, Val b);     // elementwise
  Val cdiv(Val a, Val b);     // elementwise
  Val cmax(Val a, Val b);     // elementwise max; ties route the gradient to a
  Val scale(Val a, double c);
  Val add_const(Val a, double c);
  Val leaky_relu(Val a, double slope);
  Val exp(Val a);
  Val log(Val a);
  Val clamp(Val a, double lo, double hi);
  Val sum(Val a);         // 1x1 total
  Val mean_rows(Val a);   // column means, 1 x cols
  Val repeat_rows(Val a, int copies);  // tile a 1 x c row
  Val gather_rows(Val a, std::vector<int> rows);
  Val segment_sum(Val a, std::vector<int> segment, int segments);
  Val scale_rows(Val a, Val s);        // row i scaled by s(i, 0)
  Val div_by_scalar(Val a, Val s);     // s is 1x1
  Val concat_cols(Val a, Val b);
  /// Largest singular value as a 1x1 node; gradient is the outer product of
  /// the leading singular pair.
  Val spectral_norm(Val a);
  /// Log-softmax over the rows of a column vector restricted to valid
  /// entries; invalid entries yield -infinity and receive no gradient.
  /// Throws std::domain_error when no entry is valid.
  Val masked_log_softmax(Val logits, std::vector<std::uint8_t> valid);
  /// Replaces invalid entries by `fill`; gradient flows only through valid.
  Val masked_fill(Val a, std::vector<std::uint8_t> valid, double fill);

  const Mat& value(Val v) const;
  const Mat& grad(Val v) const;

  /// Seeds d(loss)=1 and accumulates gradients; loss must be 1x1 and live on
  /// this tape.  May be called repeatedly (node gradients reset each time);
  /// parameter gradients accumulate into the bound stores.
  void backward(Val loss);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  /// Smallest distance to a nondifferentiable kink (leaky_relu at 0, clamp
  /// at a boundary, cmax at a tie) observed among recorded nodes; used to
  /// reject non-smooth points in finite-difference checks.
  double smoothness_margin() const { return smoothness_margin_; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool grad_live = false;
    int a = -1;
    int b = -1;
    ParamStore* store = nullptr;
    int param_idx = -1;
    std::function<void(Tape&, int)> backprop;
  };

  int push(Mat value, int a, int b, std::function<void(Tape&, int)> fn);
  Mat& grad_ref(int id);
  void note_margin(double m);

  std::vector<Node> nodes_;
  double smoothness_margin_ = std::numeric_limits<double>::infinity();

  friend struct Val;
};

/// Spectral norm of a dense matrix (exact SVD).  The pair variant also
/// exposes the leading singular vectors for gradients.
double spectral_norm_value(const Mat& a);
void spectral_norm_pair(const Mat& a, double& sigma, Eigen::VectorXd& u,
                        Eigen::VectorXd& v);

/// log N(x | mu, sigma); sigma must be > 0.
double gaussian_log_density(double x, double mu, double sigma);

/// Report of an analytic-vs-central-difference gradient comparison.
struct GradCheckReport {
  double worst_rel_error = 0.0;
  std::string worst_param;
  int worst_row = -1;
  int worst_col = -1;
  int checked = 0;
  bool ok = true;
  /// Worst relative error per parameter, in store order.
  std::vector<std::pair<std::string, double>> per_param;
};

/// Builds the loss through `forward` (a fresh tape per call), runs backward
/// for analytic gradients, then compares each parameter coordinate against a
/// central difference of the loss value.  Relative error uses
/// |a - n| / max(|a|, |n|, 1e-5).
GradCheckReport finite_diff_check(
    const std::function<Val(Tape&)>& forward, ParamStore& store,
    double step = 1e-5, double tolerance = 1e-4);

}  // namespace aoicast
