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

// Named parameter arrays with gradient buffers and an EMA shadow.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace lsi::nn {

using Matrix = Eigen::MatrixXd;

struct ParamEntry {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix ema;
  /// Buffers (normalization statistics, latent banks) are stored and
  /// checkpointed like parameters but never touched by the optimizer.
  bool trainable = true;
};

class ParameterStore {
 public:
  /// Registers a new array; gradient is zeroed and the EMA shadow copies init.
  /// Throws std::invalid_argument on a duplicate name.
  ParamEntry& add(std::string name, Matrix init, bool trainable = true);

  ParamEntry* find(std::string_view name);
  const ParamEntry* find(std::string_view name) const;
  ParamEntry& at(std::string_view name);
  const ParamEntry& at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::vector<ParamEntry>& entries() { return entries_; }
  const std::vector<ParamEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  void zero_grad();
  /// Throws std::runtime_error naming the first parameter with a NaN/inf gradient.
  void check_finite_grads() const;
  std::size_t num_scalars(bool trainable_only = true) const;

  /// Copies value into the EMA shadow for every entry.
  void sync_ema();
  /// Rounds value and shadow to binary32 precision (the checkpoint precision).
  void quantize_f32();

  /// Flat views over trainable values and gradients, in entry order.
  Eigen::VectorXd flat_values() const;
  Eigen::VectorXd flat_grads() const;
  void set_flat_values(const Eigen::VectorXd& flat);

  std::int64_t step = 0;

 private:
  std::vector<ParamEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// shadow <- decay * shadow + (1 - decay) * value. decay must lie in [0, 1).
void ema_update(ParameterStore& store, double decay);

}  // namespace lsi::nn
