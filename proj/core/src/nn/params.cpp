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

#include "lsi/nn/params.hpp"

#include <stdexcept>

namespace lsi::nn {

ParamEntry& ParameterStore::add(std::string name, Matrix init, bool trainable) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  ParamEntry e;
  e.name = name;
  e.grad = Matrix::Zero(init.rows(), init.cols());
  e.ema = init;
  e.value = std::move(init);
  e.trainable = trainable;
  index_.emplace(std::move(name), entries_.size());
  entries_.push_back(std::move(e));
  return entries_.back();
}

ParamEntry* ParameterStore::find(std::string_view name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const ParamEntry* ParameterStore::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

ParamEntry& ParameterStore::at(std::string_view name) {
  if (auto* e = find(name)) return *e;
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

const ParamEntry& ParameterStore::at(std::string_view name) const {
  if (const auto* e = find(name)) return *e;
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

std::size_t ParameterStore::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return it->second;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.grad.setZero();
}

void ParameterStore::check_finite_grads() const {
  for (const auto& e : entries_)
    if (!e.grad.allFinite()) throw std::runtime_error("non-finite gradient in parameter '" + e.name + "'");
}

std::size_t ParameterStore::num_scalars(bool trainable_only) const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (!trainable_only || e.trainable) n += static_cast<std::size_t>(e.value.size());
  return n;
}

void ParameterStore::sync_ema() {
  for (auto& e : entries_) e.ema = e.value;
}

void ParameterStore::quantize_f32() {
  auto round = [](Matrix& m) { m = m.cast<float>().cast<double>(); };
  for (auto& e : entries_) {
    round(e.value);
    round(e.ema);
  }
}

Eigen::VectorXd ParameterStore::flat_values() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(num_scalars()));
  Eigen::Index k = 0;
  for (const auto& e : entries_) {
    if (!e.trainable) continue;
    out.segment(k, e.value.size()) = e.value.reshaped();
    k += e.value.size();
  }
  return out;
}

Eigen::VectorXd ParameterStore::flat_grads() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(num_scalars()));
  Eigen::Index k = 0;
  for (const auto& e : entries_) {
    if (!e.trainable) continue;
    out.segment(k, e.grad.size()) = e.grad.reshaped();
    k += e.grad.size();
  }
  return out;
}

void ParameterStore::set_flat_values(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(num_scalars()))
    throw std::invalid_argument("flat parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (auto& e : entries_) {
    if (!e.trainable) continue;
    e.value.reshaped() = flat.segment(k, e.value.size());
    k += e.value.size();
  }
}

void ema_update(ParameterStore& store, double decay) {
  if (!(decay >= 0.0 && decay < 1.0)) throw std::invalid_argument("EMA decay must lie in [0, 1)");
  for (auto& e : store.entries()) {
    if (decay == 0.0) {
      e.ema = e.value;
    } else {
      e.ema = decay * e.ema + (1.0 - decay) * e.value;
    }
  }
}

}  // namespace lsi::nn
