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

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsi/nn/tape.hpp"
#include "lsi/rng.hpp"

namespace lsi::nn {

/// Fully connected stack with SiLU between layers and a linear output.
struct MlpSpec {
  int in = 0;
  std::vector<int> hidden;
  int out = 0;
  /// Zero-initialize the output layer.
  bool zero_last = false;
};

/// Weights ~ N(0, 1/fan_in), biases zero. Names are prefix.w{k}, prefix.b{k}.
void init_mlp(ParameterStore& store, std::string_view prefix, const MlpSpec& spec, Rng& rng);
Var mlp(Tape& tape, std::string_view prefix, const MlpSpec& spec, Var x);

/// Sinusoidal features [sin(w_k t), cos(w_k t)] with w_k geometric in [1, 100].
Matrix time_embedding(const Eigen::VectorXd& t, int dim);

/// One-hot rows over num_classes + 1 slots; label -1 maps to the null slot.
Matrix one_hot(std::span<const int> labels, int num_classes);

}  // namespace lsi::nn
