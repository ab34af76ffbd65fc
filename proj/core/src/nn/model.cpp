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

#include "lsi/nn/model.hpp"

#include <stdexcept>
#include <string>

namespace lsi::nn {

std::string_view to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::Deterministic: return "deterministic";
    case NoiseMode::FixedScale: return "fixed_scale";
    case NoiseMode::Learned: return "learned";
  }
  return "unknown";
}

NoiseMode noise_mode_from_string(std::string_view name) {
  for (auto m : {NoiseMode::Deterministic, NoiseMode::FixedScale, NoiseMode::Learned})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown encoder noise mode '" + std::string(name) + "'");
}

MlpSpec encoder_mlp(const EncoderSpec& spec) {
  const int out = spec.noise_mode == NoiseMode::Learned ? 2 * spec.latent_dim : spec.latent_dim;
  return {spec.obs_dim, spec.hidden, out, false};
}

MlpSpec decoder_mlp(const DecoderSpec& spec) { return {spec.latent_dim, spec.hidden, spec.obs_dim, false}; }

MlpSpec drift_mlp(const DriftSpec& spec) {
  const int in = spec.latent_dim + spec.time_embed_dim + (spec.num_classes > 0 ? spec.class_embed_dim : 0);
  const int out = spec.eps_head ? 2 * spec.latent_dim : spec.latent_dim;
  return {in, spec.hidden, out, true};
}

void init_encoder(ParameterStore& store, const EncoderSpec& spec, Rng& rng) {
  if (spec.kind == CodecKind::Identity) return;
  init_mlp(store, "encoder", encoder_mlp(spec), rng);
  if (spec.bound_latents) {
    store.add("encoder.norm_mean", Matrix::Zero(1, spec.latent_dim), false);
    store.add("encoder.norm_var", Matrix::Ones(1, spec.latent_dim), false);
  }
}

namespace {

Var pre_bound(Tape& tape, const EncoderSpec& spec, Var x, Var* log_scale) {
  Var out = mlp(tape, "encoder", encoder_mlp(spec), x);
  if (spec.noise_mode == NoiseMode::Learned) {
    if (log_scale) *log_scale = slice_cols(out, spec.latent_dim, spec.latent_dim);
    return slice_cols(out, 0, spec.latent_dim);
  }
  return out;
}

}  // namespace

EncoderOutput forward_encoder(Tape& tape, const EncoderSpec& spec, Var x, Rng& rng, EncodeMode mode) {
  if (x.cols() != spec.obs_dim)
    throw std::invalid_argument("encoder expects " + std::to_string(spec.obs_dim) + " columns, got " +
                                std::to_string(x.cols()));
  EncoderOutput out;
  if (spec.kind == CodecKind::Identity) {
    out.mu = x;
    out.z1 = x;
    return out;
  }
  Var raw = pre_bound(tape, spec, x, &out.log_scale);
  Var mu = raw;
  if (spec.bound_latents) {
    if (mode == EncodeMode::Train) {
      mu = standardize_cols(raw, spec.norm_eps);
    } else {
      Var m = tape.parameter("encoder.norm_mean");
      Var v = tape.parameter("encoder.norm_var");
      mu = normalize_cols(raw, m.value().row(0), v.value().row(0), spec.norm_eps);
    }
    mu = tanh(mu);
  }
  out.mu = mu;
  if (mode == EncodeMode::EvalDeterministic || spec.noise_mode == NoiseMode::Deterministic) {
    out.z1 = mu;
    return out;
  }
  Var eps = tape.constant(rng.normal_matrix(mu.rows(), mu.cols()));
  if (spec.noise_mode == NoiseMode::FixedScale) {
    out.z1 = add(mu, scale(eps, spec.noise_scale));
  } else {
    out.z1 = add(mu, mul(eps, exp(out.log_scale)));
  }
  return out;
}

void calibrate_encoder(ParameterStore& store, const EncoderSpec& spec, const Matrix& x, ParamSource source) {
  if (spec.kind == CodecKind::Identity || !spec.bound_latents) return;
  Tape tape(&store, source, false);
  Var raw = pre_bound(tape, spec, tape.constant(x), nullptr);
  const Eigen::RowVectorXd mean = raw.value().colwise().mean();
  const Eigen::RowVectorXd var =
      (raw.value().rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows());
  auto& m = store.at("encoder.norm_mean");
  auto& v = store.at("encoder.norm_var");
  m.value = mean;
  m.ema = mean;
  v.value = var;
  v.ema = var;
}

void init_decoder(ParameterStore& store, const DecoderSpec& spec, Rng& rng) {
  if (spec.kind == CodecKind::Identity) return;
  init_mlp(store, "decoder", decoder_mlp(spec), rng);
}

Var forward_decoder(Tape& tape, const DecoderSpec& spec, Var z1) {
  if (z1.cols() != spec.latent_dim) throw std::invalid_argument("decoder input has the wrong latent dimension");
  if (spec.kind == CodecKind::Identity) return z1;
  return mlp(tape, "decoder", decoder_mlp(spec), z1);
}

void init_drift(ParameterStore& store, const DriftSpec& spec, Rng& rng) {
  if (spec.label_drop < 0.0 || spec.label_drop > 1.0) throw std::invalid_argument("label drop must lie in [0, 1]");
  init_mlp(store, "drift", drift_mlp(spec), rng);
  if (spec.num_classes > 0) store.add("drift.class_embed", rng.normal_matrix(spec.num_classes + 1, spec.class_embed_dim));
}

DriftOutput forward_drift(Tape& tape, const DriftSpec& spec, Var zt, const Eigen::VectorXd& t,
                          std::span<const int> labels) {
  if (zt.cols() != spec.latent_dim) throw std::invalid_argument("drift input has the wrong latent dimension");
  if (t.size() != zt.rows()) throw std::invalid_argument("drift needs one time per row");
  std::vector<Var> parts{zt, tape.constant(time_embedding(t, spec.time_embed_dim))};
  if (spec.num_classes > 0) {
    std::vector<int> all_null;
    std::span<const int> labs = labels;
    if (labs.empty()) {
      all_null.assign(static_cast<std::size_t>(zt.rows()), -1);
      labs = all_null;
    }
    if (static_cast<Eigen::Index>(labs.size()) != zt.rows()) throw std::invalid_argument("drift needs one label per row");
    parts.push_back(matmul(tape.constant(one_hot(labs, spec.num_classes)), tape.parameter("drift.class_embed")));
  } else {
    for (int l : labels)
      if (l >= 0) throw std::out_of_range("unconditional drift got class label " + std::to_string(l));
  }
  Var out = mlp(tape, "drift", drift_mlp(spec), concat_cols(parts));
  DriftOutput res;
  if (spec.eps_head) {
    res.hat = slice_cols(out, 0, spec.latent_dim);
    res.eps_hat = slice_cols(out, spec.latent_dim, spec.latent_dim);
  } else {
    res.hat = out;
  }
  return res;
}

void init_model(ParameterStore& store, const ModelSpec& spec, Rng& rng) {
  if (spec.encoder.latent_dim != spec.drift.latent_dim || spec.decoder.latent_dim != spec.drift.latent_dim)
    throw std::invalid_argument("encoder, decoder and drift disagree on the latent dimension");
  if (spec.encoder.obs_dim != spec.decoder.obs_dim)
    throw std::invalid_argument("encoder and decoder disagree on the observation dimension");
  init_encoder(store, spec.encoder, rng);
  init_decoder(store, spec.decoder, rng);
  init_drift(store, spec.drift, rng);
}

}  // namespace lsi::nn
