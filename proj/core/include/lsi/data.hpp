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

// Synthetic datasets and the prior family p0.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lsi/nn/tape.hpp"
#include "lsi/rng.hpp"

namespace lsi {

using Matrix = Eigen::MatrixXd;

enum class DatasetName { GaussianRing8, Checkerboard, TwoMoons, Spirals, DiagonalGaussian };

std::string_view to_string(DatasetName name);
DatasetName dataset_name_from_string(std::string_view name);

struct DatasetSpec {
  DatasetName name = DatasetName::GaussianRing8;
  Eigen::Index n = 1000;
  bool labels = false;
  /// 0 keeps the native 2D data; otherwise embed via a fixed orthonormal map.
  int lift_dim = 8;
  std::uint64_t lift_seed = 7;
  /// DiagonalGaussian parameters.
  Eigen::Vector2d mean{1.0, -1.0};
  Eigen::Vector2d var{0.5, 2.0};
};

struct Dataset {
  Matrix x;            // n x observation_dim
  Matrix x2d;          // n x 2, before lifting
  std::vector<int> labels;  // component index, always filled
  int num_classes = 1;
  Matrix lift;         // observation_dim x 2, empty when not lifted
  Matrix centers;      // num_classes x 2 mode centers (native space)
  double mode_std = 0.0;  // isotropic std around centers where meaningful
};

int num_classes(DatasetName name);
int observation_dim(const DatasetSpec& spec);

/// Deterministic given (spec, rng state); class balanced (round robin, then shuffled).
Dataset make_dataset(const DatasetSpec& spec, Rng& rng);

/// Orthonormal columns (dim x 2) from a fixed seed.
Matrix lift_matrix(int dim, std::uint64_t seed);

/// CSV with header x0,...,x{d-1}[,label]; 9 significant digits.
void write_csv(std::ostream& out, const Matrix& x, const std::vector<int>* labels = nullptr);
/// Reads a CSV written by write_csv (optional trailing label column).
Matrix read_csv(std::istream& in, std::vector<int>* labels = nullptr);

// ---- priors ----------------------------------------------------------------

enum class PriorKind { StandardNormal, Uniform, Laplace, GaussianMixture, DataCoupledMixture, LearnableGaussian };

std::string_view to_string(PriorKind kind);
PriorKind prior_kind_from_string(std::string_view name);

struct PriorSpec {
  PriorKind kind = PriorKind::StandardNormal;
  /// GaussianMixture: k x d means (empty = +-0.8 along each axis), weights, std.
  Matrix mixture_means;
  std::vector<double> mixture_weights;
  double mixture_std = 0.6;
  /// DataCoupledMixture component std.
  double coupled_std = 0.1;
};

/// Whether scores may be recovered from the drift (standard normal p0).
bool is_standard_normal(const PriorSpec& spec);

struct PriorContext {
  /// DataCoupledMixture: encoded latents (gradient already blocked).
  const Matrix* bank = nullptr;
  /// LearnableGaussian: store holding prior.mu / prior.log_scale.
  const nn::ParameterStore* store = nullptr;
  bool use_ema = false;
};

/// i.i.d. draws, n x d. Uniform and Laplace are scaled to unit variance.
/// Throws std::invalid_argument for an empty bank or missing store.
Matrix prior_sample(const PriorSpec& spec, Eigen::Index n, Eigen::Index d, Rng& rng, const PriorContext& ctx = {});

/// Registers prior.mu (zeros) and prior.log_scale (zeros) as 1 x d parameters.
void init_learnable_prior(nn::ParameterStore& store, Eigen::Index d);

/// Reparameterized draw mu + exp(log_scale) * eps recorded on the tape.
nn::Var learnable_prior_sample(nn::Tape& tape, Eigen::Index n, Eigen::Index d, Rng& rng);

/// KL(N(0, I) || N(mu, diag exp(2 log_scale))) recorded on the tape, 1x1.
nn::Var reference_prior_kl(nn::Tape& tape);

}  // namespace lsi
