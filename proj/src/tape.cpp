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

#include "aoicast/tape.hpp"

#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aoicast {

int ParamStore::add(const std::string& name, int rows, int cols) {
  if (name.empty() || name.find(' ') != std::string::npos)
    throw std::invalid_argument("ParamStore::add: bad name '" + name + "'");
  if (index_.count(name))
    throw std::invalid_argument("ParamStore::add: duplicate name '" + name + "'");
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("ParamStore::add: bad shape");
  const int idx = size();
  names_.push_back(name);
  values_.push_back(Mat::Zero(rows, cols));
  grads_.push_back(Mat::Zero(rows, cols));
  index_[name] = idx;
  return idx;
}

int ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int ParamStore::require(const std::string& name) const {
  const int idx = index_of(name);
  if (idx < 0)
    throw std::invalid_argument("ParamStore: unknown parameter '" + name + "'");
  return idx;
}

void ParamStore::zero_grads() {
  for (Mat& g : grads_) g.setZero();
}

double ParamStore::grad_norm(const std::vector<int>& subset) const {
  double sq = 0.0;
  if (subset.empty()) {
    for (const Mat& g : grads_) sq += g.squaredNorm();
  } else {
    for (int idx : subset) sq += grads_[idx].squaredNorm();
  }
  return std::sqrt(sq);
}

void ParamStore::save(const std::string& path) const {
  std::ostringstream head;
  head << "aoicast-checkpoint 1\n";
  head << "params " << size() << "\n";
  std::int64_t offset = 0;
  for (int i = 0; i < size(); ++i) {
    head << names_[i] << " " << values_[i].rows() << " " << values_[i].cols()
         << " " << offset << "\n";
    offset += values_[i].size();
  }
  head << "payload\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("ParamStore::save: cannot open " + path);
  const std::string h = head.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (int i = 0; i < size(); ++i) {
    out.write(reinterpret_cast<const char*>(values_[i].data()),
              static_cast<std::streamsize>(sizeof(double) * values_[i].size()));
  }
  if (!out) throw std::runtime_error("ParamStore::save: write failed");
}

void ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("ParamStore::load: cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const std::string marker = "payload\n";
  const auto pos = blob.find(marker);
  if (pos == std::string::npos)
    throw std::runtime_error("ParamStore::load: missing payload marker");
  std::istringstream head(blob.substr(0, pos));
  std::string magic;
  int version = 0;
  head >> magic >> version;
  if (magic != "aoicast-checkpoint" || version != 1)
    throw std::runtime_error("ParamStore::load: bad header");
  std::string tag;
  int count = 0;
  head >> tag >> count;
  if (tag != "params" || count < 0)
    throw std::runtime_error("ParamStore::load: bad manifest");
  struct Item {
    std::string name;
    int rows, cols;
    std::int64_t offset;
  };
  std::vector<Item> items;
  for (int i = 0; i < count; ++i) {
    Item it;
    if (!(head >> it.name >> it.rows >> it.cols >> it.offset))
      throw std::runtime_error("ParamStore::load: truncated manifest");
    items.push_back(it);
  }
  // An empty store adopts the file's layout; a populated one (a constructed
  // network) must match it exactly, so loading a checkpoint from a
  // different architecture fails here instead of at some later forward pass.
  const bool adopt = names_.empty();
  if (!adopt) {
    if (static_cast<int>(items.size()) != size())
      throw std::runtime_error("ParamStore::load: parameter count mismatch");
    for (int i = 0; i < size(); ++i)
      if (items[i].name != names_[i] || items[i].rows != values_[i].rows() ||
          items[i].cols != values_[i].cols())
        throw std::runtime_error("ParamStore::load: layout mismatch at '" +
                                 items[i].name + "'");
  }
  const char* payload = blob.data() + pos + marker.size();
  const std::int64_t payload_doubles =
      static_cast<std::int64_t>(blob.size() - pos - marker.size()) /
      static_cast<std::int64_t>(sizeof(double));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& it = items[i];
    const std::int64_t need = it.offset + static_cast<std::int64_t>(it.rows) * it.cols;
    if (it.offset < 0 || need > payload_doubles)
      throw std::runtime_error("ParamStore::load: payload too small for '" +
                               it.name + "'");
    const int idx = adopt ? add(it.name, it.rows, it.cols)
                          : static_cast<int>(i);
    std::memcpy(values_[idx].data(), payload + it.offset * sizeof(double),
                sizeof(double) * values_[idx].size());
  }
  version_ = 0;
}

// ---------------------------------------------------------------------------
// Tape

int Tape::push(Mat value, int a, int b, std::function<void(Tape&, int)> fn) {
  Node n;
  n.value = std::move(value);
  n.a = a;
  n.b = b;
  n.backprop = std::move(fn);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Mat& Tape::grad_ref(int id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.grad_live = true;
  }
  return n.grad;
}

void Tape::note_margin(double m) {
  if (m < smoothness_margin_) smoothness_margin_ = m;
}

const Mat& Tape::value(Val v) const {
  if (v.tape != this || v.id < 0 || v.id >= node_count())
    throw std::invalid_argument("Tape::value: handle not on this tape");
  return nodes_[v.id].value;
}

const Mat& Tape::grad(Val v) const {
  if (v.tape != this || v.id < 0 || v.id >= node_count())
    throw std::invalid_argument("Tape::grad: handle not on this tape");
  if (!nodes_[v.id].grad_live)
    throw std::logic_error("Tape::grad: backward has not reached this node");
  return nodes_[v.id].grad;
}

Val Tape::constant(Mat value) {
  return Val{this, push(std::move(value), -1, -1, nullptr)};
}

Val Tape::param(ParamStore& store, int param_idx) {
  if (param_idx < 0 || param_idx >= store.size())
    throw std::invalid_argument("Tape::param: bad index");
  const int id = push(store.value(param_idx), -1, -1, nullptr);
  nodes_[id].store = &store;
  nodes_[id].param_idx = param_idx;
  return Val{this, id};
}

Val Tape::param(ParamStore& store, const std::string& name) {
  const int idx = store.index_of(name);
  if (idx < 0)
    throw std::invalid_argument("Tape::param: unknown parameter '" + name + "'");
  return param(store, idx);
}

namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Val Tape::add(Val a, Val b) {
  check_same_shape(value(a), value(b), "add");
  const int id = push(value(a) + value(b), a.id, b.id, [](Tape& t, int self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad_ref(t.nodes_[self].a) += g;
    t.grad_ref(t.nodes_[self].b) += g;
  });
  return Val{this, id};
}

Val Tape::sub(Val a, Val b) {
  check_same_shape(value(a), value(b), "sub");
  const int id = push(value(a) - value(b), a.id, b.id, [](Tape& t, int self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad_ref(t.nodes_[self].a) += g;
    t.grad_ref(t.nodes_[self].b) -= g;
  });
  return Val{this, id};
}

Val Tape::mul(Val a, Val b) {
  if (value(a).cols() != value(b).rows())
    throw std::invalid_argument("mul: inner dimensions disagree");
  const int id =
      push(value(a) * value(b), a.id, b.id, [](Tape& t, int self) {
        const Node& n = t.nodes_[self];
        const Mat& g = n.grad;
        t.grad_ref(n.a) += g * t.nodes_[n.b].value.transpose();
        t.grad_ref(n.b) += t.nodes_[n.a].value.transpose() * g;
      });
  return Val{this, id};
}

Val Tape::mul_nt(Val a, Val b) {
  if (value(a).cols() != value(b).cols())
    throw std::invalid_argument("mul_nt: inner dimensions disagree");
  const int id =
      push(value(a) * value(b).transpose(), a.id, b.id, [](Tape& t, int self) {
        const Node& n = t.nodes_[self];
        const Mat& g = n.grad;
        t.grad_ref(n.a) += g * t.nodes_[n.b].value;
        t.grad_ref(n.b) += g.transpose() * t.nodes_[n.a].value;
      });
  return Val{this, id};
}

Val Tape::cmul(Val a, Val b) {
  check_same_shape(value(a), value(b), "cmul");
  const int id = push(value(a).cwiseProduct(value(b)), a.id, b.id,
                      [](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        const Mat& g = n.grad;
                        t.grad_ref(n.a) += g.cwiseProduct(t.nodes_[n.b].value);
                        t.grad_ref(n.b) += g.cwiseProduct(t.nodes_[n.a].value);
                      });
  return Val{this, id};
}

Val Tape::cdiv(Val a, Val b) {
  check_same_shape(value(a), value(b), "cdiv");
  const int id = push(value(a).cwiseQuotient(value(b)), a.id, b.id,
                      [](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        const Mat& g = n.grad;
                        const Mat& bv = t.nodes_[n.b].value;
                        t.grad_ref(n.a) += g.cwiseQuotient(bv);
                        t.grad_ref(n.b) -= g.cwiseProduct(t.nodes_[self].value)
                                               .cwiseQuotient(bv);
                      });
  return Val{this, id};
}

Val Tape::cmax(Val a, Val b) {
  check_same_shape(value(a), value(b), "cmax");
  note_margin((value(a) - value(b)).cwiseAbs().minCoeff());
  const int id = push(value(a).cwiseMax(value(b)), a.id, b.id,
                      [](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        const Mat& g = n.grad;
                        const Mat& av = t.nodes_[n.a].value;
                        const Mat& bv = t.nodes_[n.b].value;
                        Mat mask =
                            (av.array() >= bv.array()).cast<double>().matrix();
                        t.grad_ref(n.a) += g.cwiseProduct(mask);
                        t.grad_ref(n.b) += g.cwiseProduct(
                            (Mat::Ones(mask.rows(), mask.cols()) - mask).eval());
                      });
  return Val{this, id};
}

Val Tape::scale(Val a, double c) {
  const int id = push(value(a) * c, a.id, -1, [c](Tape& t, int self) {
    t.grad_ref(t.nodes_[self].a) += t.nodes_[self].grad * c;
  });
  return Val{this, id};
}

Val Tape::add_const(Val a, double c) {
  Mat out = (value(a).array() + c).matrix();
  const int id = push(std::move(out), a.id, -1, [](Tape& t, int self) {
    t.grad_ref(t.nodes_[self].a) += t.nodes_[self].grad;
  });
  return Val{this, id};
}

Val Tape::leaky_relu(Val a, double slope) {
  note_margin(value(a).cwiseAbs().minCoeff());
  Mat out = value(a).unaryExpr(
      [slope](double x) { return x > 0.0 ? x : slope * x; });
  const int id = push(std::move(out), a.id, -1, [slope](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    const Mat& av = t.nodes_[n.a].value;
    Mat d = av.unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
    t.grad_ref(n.a) += n.grad.cwiseProduct(d);
  });
  return Val{this, id};
}

Val Tape::exp(Val a) {
  Mat out = value(a).array().exp().matrix();
  const int id = push(std::move(out), a.id, -1, [](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    t.grad_ref(n.a) += n.grad.cwiseProduct(n.value);
  });
  return Val{this, id};
}

Val Tape::log(Val a) {
  Mat out = value(a).array().log().matrix();
  const int id = push(std::move(out), a.id, -1, [](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    t.grad_ref(n.a) += n.grad.cwiseQuotient(t.nodes_[n.a].value);
  });
  return Val{this, id};
}

Val Tape::clamp(Val a, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < value(a).size(); ++i) {
    const double x = value(a).data()[i];
    margin = std::min({margin, std::abs(x - lo), std::abs(x - hi)});
  }
  note_margin(margin);
  Mat out = value(a).cwiseMax(lo).cwiseMin(hi);
  const int id = push(std::move(out), a.id, -1, [lo, hi](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    const Mat& av = t.nodes_[n.a].value;
    Mat d = av.unaryExpr(
        [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
    t.grad_ref(n.a) += n.grad.cwiseProduct(d);
  });
  return Val{this, id};
}

Val Tape::sum(Val a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  const int id = push(std::move(out), a.id, -1, [](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    t.grad_ref(n.a).array() += n.grad(0, 0);
  });
  return Val{this, id};
}

Val Tape::mean_rows(Val a) {
  const int rows = static_cast<int>(value(a).rows());
  Mat out = value(a).colwise().mean();
  const int id = push(std::move(out), a.id, -1, [rows](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    Mat& ga = t.grad_ref(n.a);
    for (int r = 0; r < rows; ++r) ga.row(r) += n.grad.row(0) / rows;
  });
  return Val{this, id};
}

Val Tape::repeat_rows(Val a, int copies) {
  if (value(a).rows() != 1)
    throw std::invalid_argument("repeat_rows: input must have one row");
  if (copies < 1) throw std::invalid_argument("repeat_rows: copies < 1");
  Mat out = value(a).replicate(copies, 1);
  const int id = push(std::move(out), a.id, -1, [copies](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    Mat& ga = t.grad_ref(n.a);
    for (int r = 0; r < copies; ++r) ga.row(0) += n.grad.row(r);
  });
  return Val{this, id};
}

Val Tape::gather_rows(Val a, std::vector<int> rows) {
  const Mat& av = value(a);
  Mat out(static_cast<int>(rows.size()), av.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows())
      throw std::invalid_argument("gather_rows: index out of range");
    out.row(static_cast<int>(i)) = av.row(rows[i]);
  }
  const int id = push(std::move(out), a.id, -1,
                      [rows = std::move(rows)](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        Mat& ga = t.grad_ref(n.a);
                        for (size_t i = 0; i < rows.size(); ++i)
                          ga.row(rows[i]) += n.grad.row(static_cast<int>(i));
                      });
  return Val{this, id};
}

Val Tape::segment_sum(Val a, std::vector<int> segment, int segments) {
  const Mat& av = value(a);
  if (static_cast<int>(segment.size()) != av.rows())
    throw std::invalid_argument("segment_sum: one segment id per row required");
  Mat out = Mat::Zero(segments, av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    if (segment[r] < 0 || segment[r] >= segments)
      throw std::invalid_argument("segment_sum: segment id out of range");
    out.row(segment[r]) += av.row(r);
  }
  const int id = push(std::move(out), a.id, -1,
                      [segment = std::move(segment)](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        Mat& ga = t.grad_ref(n.a);
                        for (size_t r = 0; r < segment.size(); ++r)
                          ga.row(static_cast<int>(r)) += n.grad.row(segment[r]);
                      });
  return Val{this, id};
}

Val Tape::scale_rows(Val a, Val s) {
  const Mat& av = value(a);
  const Mat& sv = value(s);
  if (sv.cols() != 1 || sv.rows() != av.rows())
    throw std::invalid_argument("scale_rows: scaler must be rows x 1");
  Mat out = (av.array().colwise() * sv.col(0).array()).matrix();
  const int id = push(std::move(out), a.id, s.id, [](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    const Mat& g = n.grad;
    const Mat& av = t.nodes_[n.a].value;
    const Mat& sv = t.nodes_[n.b].value;
    t.grad_ref(n.a) += (g.array().colwise() * sv.col(0).array()).matrix();
    Mat& gs = t.grad_ref(n.b);
    gs.col(0) += g.cwiseProduct(av).rowwise().sum();
  });
  return Val{this, id};
}

Val Tape::div_by_scalar(Val a, Val s) {
  const Mat& sv = value(s);
  if (sv.rows() != 1 || sv.cols() != 1)
    throw std::invalid_argument("div_by_scalar: divisor must be 1x1");
  Mat out = value(a) / sv(0, 0);
  const int id = push(std::move(out), a.id, s.id, [](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    const Mat& g = n.grad;
    const double s0 = t.nodes_[n.b].value(0, 0);
    t.grad_ref(n.a) += g / s0;
    t.grad_ref(n.b)(0, 0) -=
        g.cwiseProduct(t.nodes_[n.a].value).sum() / (s0 * s0);
  });
  return Val{this, id};
}

Val Tape::concat_cols(Val a, Val b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  if (av.rows() != bv.rows())
    throw std::invalid_argument("concat_cols: row counts disagree");
  Mat out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const int left = static_cast<int>(av.cols());
  const int id = push(std::move(out), a.id, b.id, [left](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    const Mat& g = n.grad;
    t.grad_ref(n.a) += g.leftCols(left);
    t.grad_ref(n.b) += g.rightCols(g.cols() - left);
  });
  return Val{this, id};
}

Val Tape::spectral_norm(Val a) {
  double sigma;
  Eigen::VectorXd u, v;
  spectral_norm_pair(value(a), sigma, u, v);
  Mat out(1, 1);
  out(0, 0) = sigma;
  const int id =
      push(std::move(out), a.id, -1, [u, v](Tape& t, int self) {
        const Node& n = t.nodes_[self];
        t.grad_ref(n.a) += n.grad(0, 0) * (u * v.transpose());
      });
  return Val{this, id};
}

Val Tape::masked_log_softmax(Val logits, std::vector<std::uint8_t> valid) {
  const Mat& lv = value(logits);
  if (lv.cols() != 1)
    throw std::invalid_argument("masked_log_softmax: column vector expected");
  if (static_cast<int>(valid.size()) != lv.rows())
    throw std::invalid_argument("masked_log_softmax: mask size mismatch");
  double max_valid = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < lv.rows(); ++i)
    if (valid[i]) max_valid = std::max(max_valid, lv(i, 0));
  if (!std::isfinite(max_valid))
    throw std::domain_error("masked_log_softmax: no valid entry");
  double denom = 0.0;
  for (int i = 0; i < lv.rows(); ++i)
    if (valid[i]) denom += std::exp(lv(i, 0) - max_valid);
  const double log_denom = max_valid + std::log(denom);
  Mat out(lv.rows(), 1);
  for (int i = 0; i < lv.rows(); ++i)
    out(i, 0) = valid[i] ? lv(i, 0) - log_denom
                         : -std::numeric_limits<double>::infinity();
  const int id = push(std::move(out), logits.id, -1,
                      [valid = std::move(valid)](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        const Mat& g = n.grad;
                        double g_sum = 0.0;
                        for (int i = 0; i < g.rows(); ++i)
                          if (valid[i]) g_sum += g(i, 0);
                        Mat& gl = t.grad_ref(n.a);
                        for (int i = 0; i < g.rows(); ++i) {
                          if (!valid[i]) continue;
                          gl(i, 0) += g(i, 0) - std::exp(n.value(i, 0)) * g_sum;
                        }
                      });
  return Val{this, id};
}

Val Tape::masked_fill(Val a, std::vector<std::uint8_t> valid, double fill) {
  const Mat& av = value(a);
  if (av.cols() != 1 || static_cast<int>(valid.size()) != av.rows())
    throw std::invalid_argument("masked_fill: column vector and matching mask expected");
  Mat out = av;
  for (int i = 0; i < av.rows(); ++i)
    if (!valid[i]) out(i, 0) = fill;
  const int id = push(std::move(out), a.id, -1,
                      [valid = std::move(valid)](Tape& t, int self) {
                        const Node& n = t.nodes_[self];
                        Mat& ga = t.grad_ref(n.a);
                        for (int i = 0; i < n.grad.rows(); ++i)
                          if (valid[i]) ga(i, 0) += n.grad(i, 0);
                      });
  return Val{this, id};
}

void Tape::backward(Val loss) {
  if (loss.tape != this || loss.id < 0 || loss.id >= node_count())
    throw std::invalid_argument("backward: loss not on this tape");
  const Node& ln = nodes_[loss.id];
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw std::invalid_argument("backward: loss must be 1x1");
  for (Node& n : nodes_) n.grad_live = false;
  grad_ref(loss.id)(0, 0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad_live) continue;
    if (n.backprop) n.backprop(*this, id);
    if (n.store != nullptr) n.store->grad(n.param_idx) += n.grad;
  }
}

// ---------------------------------------------------------------------------

namespace {

struct SpectralEntry {
  Mat a;
  double sigma = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

std::uint64_t fingerprint(const Mat& a) {
  std::uint64_t h = 14695981039346656037ull;
  const double* data = a.data();
  const std::size_t n = static_cast<std::size_t>(a.size());
  for (std::size_t i = 0; i < n; ++i) {
    h ^= std::bit_cast<std::uint64_t>(data[i]);
    h *= 1099511628211ull;
  }
  return h ^ (static_cast<std::uint64_t>(a.rows()) << 32 |
              static_cast<std::uint64_t>(a.cols()));
}

}  // namespace

void spectral_norm_pair(const Mat& a, double& sigma, Eigen::VectorXd& u,
                        Eigen::VectorXd& v) {
  if (a.size() == 0) throw std::invalid_argument("spectral_norm: empty matrix");
  // Forward passes decompose the same weight matrices thousands of times
  // between optimizer steps, so memoize on exact bytes (per thread).
  thread_local std::unordered_map<std::uint64_t, std::vector<SpectralEntry>>
      cache;
  thread_local std::size_t cached_entries = 0;
  const std::uint64_t key = fingerprint(a);
  auto it = cache.find(key);
  if (it != cache.end()) {
    for (const SpectralEntry& e : it->second) {
      if (e.a.rows() == a.rows() && e.a.cols() == a.cols() &&
          (e.a.array() == a.array()).all()) {
        sigma = e.sigma;
        u = e.u;
        v = e.v;
        return;
      }
    }
  }
  // Full decomposition rather than an iterative estimate: the leading
  // singular vectors feed the gradient, and an under-converged pair (slow
  // when the top two singular values nearly tie) corrupts it.
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sigma = svd.singularValues()(0);
  if (sigma > 0.0) {
    u = svd.matrixU().col(0);
    v = svd.matrixV().col(0);
  } else {
    u = Eigen::VectorXd::Zero(a.rows());
    v = Eigen::VectorXd::Zero(a.cols());
  }
  if (cached_entries >= 256) {
    cache.clear();
    cached_entries = 0;
  }
  cache[key].push_back({a, sigma, u, v});
  ++cached_entries;
}

double spectral_norm_value(const Mat& a) {
  double sigma;
  Eigen::VectorXd u, v;
  spectral_norm_pair(a, sigma, u, v);
  return sigma;
}

double gaussian_log_density(double x, double mu, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("gaussian_log_density: sigma must be > 0");
  const double z = (x - mu) / sigma;
  return -std::log(sigma) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
}

GradCheckReport finite_diff_check(const std::function<Val(Tape&)>& forward,
                                  ParamStore& store, double step,
                                  double tolerance) {
  GradCheckReport report;
  store.zero_grads();
  std::vector<Mat> analytic;
  {
    Tape tape;
    Val loss = forward(tape);
    tape.backward(loss);
  }
  for (int i = 0; i < store.size(); ++i) analytic.push_back(store.grad(i));
  store.zero_grads();

  auto eval = [&]() {
    Tape tape;
    Val loss = forward(tape);
    return tape.value(loss)(0, 0);
  };

  for (int i = 0; i < store.size(); ++i) {
    Mat& value = store.value(i);
    double param_worst = 0.0;
    for (int r = 0; r < value.rows(); ++r) {
      for (int c = 0; c < value.cols(); ++c) {
        const double saved = value(r, c);
        value(r, c) = saved + step;
        const double up = eval();
        value(r, c) = saved - step;
        const double down = eval();
        value(r, c) = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[i](r, c);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-5});
        const double rel = std::abs(a - numeric) / denom;
        ++report.checked;
        param_worst = std::max(param_worst, rel);
        if (rel > report.worst_rel_error) {
          report.worst_rel_error = rel;
          report.worst_param = store.name(i);
          report.worst_row = r;
          report.worst_col = c;
        }
      }
    }
    report.per_param.emplace_back(store.name(i), param_worst);
  }
  report.ok = report.worst_rel_error < tolerance;
  return report;
}

}  // namespace aoicast
