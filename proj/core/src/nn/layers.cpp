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

#include "lsi/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace lsi::nn {
namespace {

std::string param_name(std::string_view prefix, char kind, std::size_t layer) {
  return std::string(prefix) + "." + kind + std::to_string(layer);
}

std::vector<int> widths(const MlpSpec& spec) {
  std::vector<int> w;
  w.push_back(spec.in);
  w.insert(w.end(), spec.hidden.begin(), spec.hidden.end());
  w.push_back(spec.out);
  return w;
}

}  // namespace

void init_mlp(ParameterStore& store, std::string_view prefix, const MlpSpec& spec, Rng& rng) {
  if (spec.in <= 0 || spec.out <= 0) throw std::invalid_argument("mlp needs positive in/out widths");
  const auto w = widths(spec);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const bool last = k + 2 == w.size();
    Matrix weight = Matrix::Zero(w[k], w[k + 1]);
    if (!(last && spec.zero_last)) weight = rng.normal_matrix(w[k], w[k + 1]) / std::sqrt(static_cast<double>(w[k]));
    store.add(param_name(prefix, 'w', k), std::move(weight));
    store.add(param_name(prefix, 'b', k), Matrix::Zero(1, w[k + 1]));
  }
}

Var mlp(Tape& tape, std::string_view prefix, const MlpSpec& spec, Var x) {
  if (x.cols() != spec.in)
    throw std::invalid_argument(std::string(prefix) + ": expected " + std::to_string(spec.in) + " input columns, got " +
                                std::to_string(x.cols()));
  const auto w = widths(spec);
  Var h = x;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    h = add_row(matmul(h, tape.parameter(param_name(prefix, 'w', k))), tape.parameter(param_name(prefix, 'b', k)));
    if (k + 2 < w.size()) h = silu(h);
  }
  return h;
}

Matrix time_embedding(const Eigen::VectorXd& t, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("time embedding dimension must be positive and even");
  const int half = dim / 2;
  Matrix out(t.size(), dim);
  for (int k = 0; k < half; ++k) {
    const double w = half == 1 ? 1.0 : std::exp(std::log(100.0) * k / (half - 1));
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      out(i, 2 * k) = std::sin(w * t(i));
      out(i, 2 * k + 1) = std::cos(w * t(i));
    }
  }
  return out;
}

Matrix one_hot(std::span<const int> labels, int num_classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < -1 || c >= num_classes) throw std::invalid_argument("unknown class label " + std::to_string(c));
    out(static_cast<Eigen::Index>(i), c < 0 ? num_classes : c) = 1.0;
  }
  return out;
}

}  // namespace lsi::nn
