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

#include "lsi/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace lsi::nn {

void AdamW::step(ParameterStore& store) { update(store, ""); }

void AdamW::step_prefix(ParameterStore& store, std::string_view prefix) { update(store, prefix); }

void AdamW::update(ParameterStore& store, std::string_view prefix) {
  auto& entries = store.entries();
  if (m_.size() < entries.size()) {
    for (std::size_t i = m_.size(); i < entries.size(); ++i) {
      m_.push_back(Matrix::Zero(entries[i].value.rows(), entries[i].value.cols()));
      v_.push_back(Matrix::Zero(entries[i].value.rows(), entries[i].value.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ParamEntry& e = entries[i];
    if (!e.trainable || !e.name.starts_with(prefix)) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * e.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * e.grad.cwiseAbs2();
    Matrix update = (m_[i] / bc1).array() / ((v_[i] / bc2).array().sqrt() + cfg_.eps);
    if (cfg_.weight_decay != 0.0) update += cfg_.weight_decay * e.value;
    if (!update.allFinite()) throw std::runtime_error("non-finite optimizer update for '" + e.name + "'");
    e.value -= cfg_.lr * update;
  }
  ++store.step;
}

}  // namespace lsi::nn
