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

// Encoder, decoder and latent drift networks.

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lsi/nn/layers.hpp"
#include "lsi/nn/tape.hpp"
#include "lsi/rng.hpp"

namespace lsi::nn {

enum class CodecKind { Mlp, Identity };
enum class NoiseMode { Deterministic, FixedScale, Learned };

std::string_view to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(std::string_view name);

struct EncoderSpec {
  CodecKind kind = CodecKind::Mlp;
  int obs_dim = 8;
  std::vector<int> hidden{64, 64};
  int latent_dim = 2;
  NoiseMode noise_mode = NoiseMode::FixedScale;
  double noise_scale = 0.025;
  /// Per-batch standardization followed by tanh; noise is added afterwards.
  bool bound_latents = true;
  double norm_eps = 1e-5;
};

struct DecoderSpec {
  CodecKind kind = CodecKind::Mlp;
  int latent_dim = 2;
  std::vector<int> hidden{64, 64};
  int obs_dim = 8;
};

struct DriftSpec {
  int latent_dim = 2;
  std::vector<int> hidden{128, 128, 128};
  int time_embed_dim = 16;
  /// 0 = unconditional.
  int num_classes = 0;
  int class_embed_dim = 8;
  double label_drop = 0.1;
  /// Extra latent_dim outputs predicting the bridge noise.
  bool eps_head = false;
};

/// How the encoder normalizes and whether it adds noise.
enum class EncodeMode {
  Train,              // batch statistics, stochastic
  Eval,               // stored statistics, stochastic
  EvalDeterministic,  // stored statistics, no noise
};

struct EncoderOutput {
  Var z1;
  Var mu;         // bounded mean
  Var log_scale;  // only for NoiseMode::Learned
};

void init_encoder(ParameterStore& store, const EncoderSpec& spec, Rng& rng);
EncoderOutput forward_encoder(Tape& tape, const EncoderSpec& spec, Var x, Rng& rng, EncodeMode mode);

/// Per-column mean/variance of the pre-bound encoder features for x, used to
/// refresh encoder.norm_mean / encoder.norm_var (value and shadow).
void calibrate_encoder(ParameterStore& store, const EncoderSpec& spec, const Matrix& x, ParamSource source);

void init_decoder(ParameterStore& store, const DecoderSpec& spec, Rng& rng);
Var forward_decoder(Tape& tape, const DecoderSpec& spec, Var z1);

struct DriftOutput {
  Var hat;      // parameterized drift
  Var eps_hat;  // invalid unless spec.eps_head
};

void init_drift(ParameterStore& store, const DriftSpec& spec, Rng& rng);
/// t holds one time per row; labels may be empty (unconditional) or one per
/// row with -1 selecting the null class embedding.
DriftOutput forward_drift(Tape& tape, const DriftSpec& spec, Var zt, const Eigen::VectorXd& t,
                          std::span<const int> labels);

/// The three jointly trained networks plus the fixed observation scaling
/// (observations are multiplied by obs_scale before encoding).
struct ModelSpec {
  EncoderSpec encoder;
  DecoderSpec decoder;
  DriftSpec drift;
  double obs_scale = 1.0;
};

void init_model(ParameterStore& store, const ModelSpec& spec, Rng& rng);

MlpSpec encoder_mlp(const EncoderSpec& spec);
MlpSpec decoder_mlp(const DecoderSpec& spec);
MlpSpec drift_mlp(const DriftSpec& spec);

}  // namespace lsi::nn
