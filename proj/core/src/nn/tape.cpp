// Copyright 2026 The LSI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsi/nn/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsi::nn {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw std::logic_error("scalar() on a non 1x1 node");
  return v(0, 0);
}

Tape::Tape(ParameterStore* store, ParamSource source, bool record)
    : store_(store), source_(source), record_(record) {
  nodes_.reserve(256);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(std::string_view name) {
  if (store_ == nullptr) throw std::logic_error("tape has no parameter store");
  const std::size_t idx = store_->index_of(name);
  const ParamEntry& e = store_->entries()[idx];
  Node n;
  if (source_ == ParamSource::Ema) {
    n.value = e.ema;
  } else {
    n.value = e.value;
    n.requires_grad = record_ && e.trainable;
    n.param_index = static_cast<int>(idx);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Pullback pullback) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& p : parents) n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(p.id())].requires_grad;
    if (n.requires_grad) n.pullback = std::move(pullback);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, bool needs_grad, Pullback pullback) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = record_ && needs_grad;
  if (n.requires_grad) n.pullback = std::move(pullback);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Matrix& Tape::grad(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.grad.size() == 0 ? empty_ : n.grad;
}

void Tape::backward(Var out) {
  if (out.tape() != this) throw std::logic_error("backward on a foreign node");
  Node& root = nodes_[static_cast<std::size_t>(out.id())];
  if (root.value.size() != 1) throw std::logic_error("backward needs a 1x1 output");
  if (!root.requires_grad) return;
  root.grad = Matrix::Ones(1, 1);
  for (int i = out.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;
    if (n.param_index >= 0) {
      ParamEntry& e = store_->entries()[static_cast<std::size_t>(n.param_index)];
      e.grad += n.grad;
    } else if (n.pullback) {
      n.pullback(*this, n.grad, n.value);
    }
  }
}

// ---- ops -------------------------------------------------------------------

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
    if (tp.requires_grad_id(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
    if (tp.requires_grad_id(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "add");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, -g);
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "mul");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value().cwiseProduct(b.value()), {a, b},
                          [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
                            if (tp.requires_grad_id(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
                            if (tp.requires_grad_id(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
                          });
}

Var scale(Var a, double c) {
  const int ia = a.id();
  return a.tape()->record(c * a.value(), {a},
                          [ia, c](Tape& tp, const Matrix& g, const Matrix&) { tp.accumulate(ia, c * g); });
}

Var add_row(Var x, Var row) {
  if (row.rows() != 1 || row.cols() != x.cols()) throw std::invalid_argument("add_row: expected a 1 x cols row");
  const int ix = x.id(), ir = row.id();
  Matrix out = x.value().rowwise() + row.value().row(0);
  return x.tape()->record(std::move(out), {x, row}, [ix, ir](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ix, g);
    if (tp.requires_grad_id(ir)) tp.accumulate(ir, g.colwise().sum());
  });
}

Var mul_row(Var x, Var row) {
  if (row.rows() != 1 || row.cols() != x.cols()) throw std::invalid_argument("mul_row: expected a 1 x cols row");
  const int ix = x.id(), ir = row.id();
  Matrix out = x.value().array().rowwise() * row.value().row(0).array();
  return x.tape()->record(std::move(out), {x, row}, [ix, ir](Tape& tp, const Matrix& g, const Matrix&) {
    if (tp.requires_grad_id(ix)) tp.accumulate(ix, (g.array().rowwise() * tp.value(ir).row(0).array()).matrix());
    if (tp.requires_grad_id(ir)) tp.accumulate(ir, g.cwiseProduct(tp.value(ix)).colwise().sum());
  });
}

Var row_scale(Var x, const Eigen::VectorXd& c) {
  if (c.size() != x.rows()) throw std::invalid_argument("row_scale: coefficient count differs from rows");
  const int ix = x.id();
  Matrix out = c.asDiagonal() * x.value();
  return x.tape()->record(std::move(out), {x}, [ix, c](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ix, c.asDiagonal() * g);
  });
}

Var tanh(Var x) {
  const int ix = x.id();
  Matrix out = x.value().array().tanh().matrix();
  return x.tape()->record(std::move(out), {x}, [ix](Tape& tp, const Matrix& g, const Matrix& y) {
    tp.accumulate(ix, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var silu(Var x) {
  const int ix = x.id();
  const Matrix& xv = x.value();
  Matrix out = (xv.array() / (1.0 + (-xv.array()).exp())).matrix();
  return x.tape()->record(std::move(out), {x}, [ix](Tape& tp, const Matrix& g, const Matrix&) {
    const auto xa = tp.value(ix).array();
    const Eigen::ArrayXXd s = 1.0 / (1.0 + (-xa).exp());
    tp.accumulate(ix, (g.array() * (s * (1.0 + xa * (1.0 - s)))).matrix());
  });
}

Var exp(Var x) {
  const int ix = x.id();
  Matrix out = x.value().array().exp().matrix();
  return x.tape()->record(std::move(out), {x}, [ix](Tape& tp, const Matrix& g, const Matrix& y) {
    tp.accumulate(ix, g.cwiseProduct(y));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Tape& tp = *parts.front().tape();
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index c = 0;
  bool needs = false;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
    needs = needs || tp.requires_grad(p);
  }
  return tp.record(std::move(out), needs, [ids, widths](Tape& t, const Matrix& g, const Matrix&) {
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad_id(ids[k])) t.accumulate(ids[k], g.middleCols(off, widths[k]));
      off += widths[k];
    }
  });
}

Var standardize_cols(Var x, double eps) {
  const Matrix& xv = x.value();
  const double n = static_cast<double>(xv.rows());
  if (xv.rows() < 2) throw std::invalid_argument("standardize_cols needs at least two rows");
  const Eigen::RowVectorXd mean = xv.colwise().mean();
  const Matrix centered = xv.rowwise() - mean;
  const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix out = (centered.array().rowwise() * inv_std.array()).matrix();
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, inv_std, n](Tape& tp, const Matrix& g, const Matrix& y) {
    // dx = inv_std * (g - mean(g) - y * mean(g .* y))
    const Eigen::RowVectorXd g_mean = g.colwise().mean();
    const Eigen::RowVectorXd gy_mean = g.cwiseProduct(y).colwise().sum() / n;
    Matrix dx = g.rowwise() - g_mean;
    dx -= (y.array().rowwise() * gy_mean.array()).matrix();
    dx = (dx.array().rowwise() * inv_std.array()).matrix();
    tp.accumulate(ix, dx);
  });
}

Var normalize_cols(Var x, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& var, double eps) {
  if (mean.size() != x.cols() || var.size() != x.cols())
    throw std::invalid_argument("normalize_cols: statistics width differs from columns");
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix out = ((x.value().rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, inv_std](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ix, (g.array().rowwise() * inv_std.array()).matrix());
  });
}

Var mean_square(Var x) {
  const int ix = x.id();
  const double n = static_cast<double>(x.value().size());
  Matrix out(1, 1);
  out(0, 0) = x.value().squaredNorm() / n;
  return x.tape()->record(std::move(out), {x}, [ix, n](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ix, (2.0 * g(0, 0) / n) * tp.value(ix));
  });
}

Var sum(Var x) {
  const int ix = x.id();
  const Eigen::Index r = x.rows(), c = x.cols();
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return x.tape()->record(std::move(out), {x}, [ix, r, c](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(ix, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var stop_gradient(Var x) { return x.tape()->constant(x.value()); }

Var gather_rows(Var x, std::span<const Eigen::Index> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= x.rows()) throw std::out_of_range("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = x.value().row(idx[i]);
  }
  const int ix = x.id();
  const Eigen::Index rows = x.rows();
  std::vector<Eigen::Index> index(idx.begin(), idx.end());
  return x.tape()->record(std::move(out), {x}, [ix, rows, index](Tape& tp, const Matrix& g, const Matrix&) {
    Matrix dx = Matrix::Zero(rows, g.cols());
    for (std::size_t i = 0; i < index.size(); ++i) dx.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
    tp.accumulate(ix, dx);
  });
}

Var slice_cols(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) throw std::out_of_range("slice_cols: range outside node");
  const int ix = x.id();
  const Eigen::Index rows = x.rows(), cols = x.cols();
  Matrix out = x.value().middleCols(start, count);
  return x.tape()->record(std::move(out), {x}, [ix, rows, cols, start, count](Tape& tp, const Matrix& g, const Matrix&) {
    Matrix dx = Matrix::Zero(rows, cols);
    dx.middleCols(start, count) = g;
    tp.accumulate(ix, dx);
  });
}

}  // namespace lsi::nn
