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

// Reverse-mode differentiation over batched dense matrices.
//
// A Tape records every operation in creation order; backward() walks it in
// reverse and accumulates gradients. Rows are batch samples, columns features.
// Parameter leaves read from a ParameterStore and, after backward(), add their
// gradients into the store's gradient buffers.

#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lsi/nn/params.hpp"

namespace lsi::nn {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Which copy of the parameters a tape reads.
enum class ParamSource { Live, Ema };

class Tape {
 public:
  /// Receives the output gradient and the op's own output value.
  using Pullback = std::function<void(Tape&, const Matrix& grad_out, const Matrix& out)>;

  explicit Tape(ParameterStore* store = nullptr, ParamSource source = ParamSource::Live, bool record = true);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a store entry. Differentiable only for Live trainable
  /// entries on a recording tape.
  Var parameter(std::string_view name);

  /// Registers an op result. The pullback is dropped when no parent needs a
  /// gradient or the tape is not recording.
  Var record(Matrix value, std::initializer_list<Var> parents, Pullback pullback);
  Var record(Matrix value, bool needs_grad, Pullback pullback);

  /// Seeds d(out)/d(out) = 1 for a 1x1 node and propagates.
  void backward(Var out);

  template <class Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(int id) const;
  bool requires_grad(Var v) const { return requires_grad_id(v.id()); }
  bool requires_grad_id(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  ParameterStore* store() const { return store_; }
  ParamSource source() const { return source_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Pullback pullback;
    bool requires_grad = false;
    int param_index = -1;
  };

  ParameterStore* store_;
  ParamSource source_;
  bool record_;
  std::vector<Node> nodes_;
  Matrix empty_;
};

// ---- ops -------------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product of equal-shape nodes.
Var mul(Var a, Var b);
Var scale(Var a, double c);
/// x + b where b is a 1 x cols row broadcast over rows.
Var add_row(Var x, Var row);
/// x .* b where b is a 1 x cols row broadcast over rows.
Var mul_row(Var x, Var row);
/// Row i of x multiplied by the constant c(i).
Var row_scale(Var x, const Eigen::VectorXd& c);
Var tanh(Var x);
Var silu(Var x);
Var exp(Var x);
Var concat_cols(std::span<const Var> parts);
/// Per-column standardization with batch statistics: (x - mean) / sqrt(var + eps).
Var standardize_cols(Var x, double eps);
/// Per-column affine normalization with fixed statistics.
Var normalize_cols(Var x, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& var, double eps);
/// Mean of squared entries, 1x1.
Var mean_square(Var x);
/// Sum of entries, 1x1.
Var sum(Var x);
/// Identity on values, zero gradient.
Var stop_gradient(Var x);
/// Row gather x[idx[i], :]; gradients scatter back.
Var gather_rows(Var x, std::span<const Eigen::Index> idx);
/// Column block [start, start + count).
Var slice_cols(Var x, Eigen::Index start, Eigen::Index count);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double c, Var a) { return scale(a, c); }

}  // namespace lsi::nn
