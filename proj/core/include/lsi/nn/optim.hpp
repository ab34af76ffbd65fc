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

#include <cstdint>
#include <vector>

#include "lsi/nn/params.hpp"

namespace lsi::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-12;
  double weight_decay = 0.0;
};

/// Adaptive-moment optimizer with bias correction and decoupled weight decay.
/// Moment buffers are keyed by store entry index; only trainable entries move.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  /// One update from the store's gradient buffers; increments store.step.
  /// Throws std::runtime_error (naming the parameter) on a non-finite update.
  void step(ParameterStore& store);
  /// Same, restricted to entries whose name starts with prefix.
  void step_prefix(ParameterStore& store, std::string_view prefix);

  const AdamWConfig& config() const { return cfg_; }
  AdamWConfig& config() { return cfg_; }
  std::int64_t count() const { return t_; }

 private:
  void update(ParameterStore& store, std::string_view prefix);

  AdamWConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t t_ = 0;
};

}  // namespace lsi::nn
