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

// The gamma-indexed sampler family over a latent drift field, classifier-free
// guidance, probability-flow inversion and an exact-drift Gaussian oracle.
//
// All members integrate
//   dz = [h(z, t) - (1 - gamma_t^2) sigma^2 / 2 * score(z, t)] dt + gamma_t sigma dW
// from t = 0 to T = 1 - t_clip with Euler-Maruyama and then jump to t = 1 with
// z1 = z_T + (1 - T) h(z_T, T), i.e. the drift's own estimate of E[z1 | z_T].

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lsi/data.hpp"
#include "lsi/nn/model.hpp"
#include "lsi/objective.hpp"
#include "lsi/rng.hpp"
#include "lsi/schedules.hpp"

namespace lsi {

enum class GammaMode { Constant, Decaying };
enum class ScoreSource { FromDrift, FromEpsHead };

std::string_view to_string(GammaMode mode);
GammaMode gamma_mode_from_string(std::string_view name);
std::string_view to_string(ScoreSource source);
ScoreSource score_source_from_string(std::string_view name);

struct SamplerConfig {
  int n_steps = 300;
  GammaMode gamma_mode = GammaMode::Constant;
  double gamma = 0.0;
  double guidance_lambda = 0.0;
  Parameterization parameterization = Parameterization::InterpFlow;
  ScoreSource score_source = ScoreSource::FromDrift;
  double step_grid_exponent = 1.0;
  double t_clip = 1e-3;
  std::uint64_t seed = 0;
  /// Chains are integrated in fixed-size blocks; results do not depend on the
  /// number of worker threads.
  int block_size = 512;
  /// 0 = LSI_THREADS or hardware concurrency.
  int threads = 0;
};

/// Config with the grid exponent preset for a parameterization (2 for
/// Denoising and NoisePred, 1 otherwise).
SamplerConfig preset_for(Parameterization p);

/// Throws std::invalid_argument on bad fields or on FromDrift with a prior
/// that is not standard normal.
void validate(const SamplerConfig& cfg, const PriorSpec& prior);

double gamma_at(const SamplerConfig& cfg, double t);

/// n_steps + 1 times from 0 to 1 - t_clip: t_k = T (1 - (1 - k/N)^c).
std::vector<double> step_grid(const SamplerConfig& cfg);

/// (-z_t + t h) / (sigma^2 t + 1 - t); linear schedule, standard normal prior.
Vec score_from_drift(const Schedule& s, double t, const Vec& zt, const Vec& h);
Matrix score_from_drift(const Schedule& s, double t, const Matrix& zt, const Matrix& h);

/// -eps_pred / eta_t for 0 < t < 1.
Vec score_from_eps(const Schedule& s, double t, const Vec& eps_pred);
Matrix score_from_eps(const Schedule& s, double t, const Matrix& eps_pred);

/// (1 + lambda) h_cond - lambda h_uncond.
Vec cfg_drift(const Vec& h_cond, const Vec& h_uncond, double lambda);
Matrix cfg_drift(const Matrix& h_cond, const Matrix& h_uncond, double lambda);

/// Drift and (optionally) score for a block of states at one time. `labels`
/// is empty or holds one entry per row.
struct FieldValue {
  Matrix h;
  Matrix score;  // empty when not requested
};
using FieldFn = std::function<FieldValue(const Matrix& zt, double t, std::span<const int> labels, bool need_score)>;

/// One Euler-Maruyama step on every row of z. rngs holds one stream per row and
/// is only consumed when gamma_t > 0. Returns the drift used (for diagnostics).
void sampler_step(const Schedule& s, Matrix& z, double t, double dt, const SamplerConfig& cfg, const FieldFn& field,
                  std::span<const int> labels, std::span<Rng> rngs);

struct IntegrationResult {
  Matrix z1;
  /// Mean over chains of |z_{k+1} - z_k| per step (n_steps + 1 entries, the
  /// last being the terminal jump).
  std::vector<double> step_norms;
};

/// Integrates rows of z0 (chain i uses stream Rng(seed).split(first_chain + i)).
IntegrationResult integrate(const Schedule& s, const Matrix& z0, const SamplerConfig& cfg, const FieldFn& field,
                            std::span<const int> labels = {});

/// Probability-flow inversion: solves the terminal jump for z_T, then runs
/// explicit Euler backwards from T to 0 on the same grid.
Matrix invert_latents(const Schedule& s, const Matrix& z1, const SamplerConfig& cfg, const FieldFn& field,
                      std::span<const int> labels = {});

/// Drift of the linear interpolant from N(0, I) to N(m, diag S).
Vec exact_gaussian_drift(const Vec& target_mean, const Vec& target_var, const Schedule& s, double t, const Vec& zt);
Matrix exact_gaussian_drift(const Vec& target_mean, const Vec& target_var, const Schedule& s, double t,
                            const Matrix& zt);
/// Score of p_t for the same problem.
Matrix exact_gaussian_score(const Vec& target_mean, const Vec& target_var, const Schedule& s, double t,
                            const Matrix& zt);
/// E[eps | z_t] for the same problem (the optimal eps-head output).
Matrix exact_gaussian_eps(const Vec& target_mean, const Vec& target_var, const Schedule& s, double t, const Matrix& zt);
FieldFn exact_gaussian_field(const Vec& target_mean, const Vec& target_var, const Schedule& s, const SamplerConfig& cfg);

/// Field of a trained model read from the EMA parameters. Evaluation times are
/// clamped to [t_clip, 1 - t_clip], the range seen in training.
FieldFn model_field(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Schedule& s,
                    const SamplerConfig& cfg);

struct SampleRun {
  Matrix z0;
  Matrix latents;       // z1
  Matrix observations;  // decoded, in the original observation units
  std::vector<double> step_norms;
};

/// Draws z0 per chain, integrates and decodes once. n = 0 gives an empty run.
SampleRun sample(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Schedule& s,
                 const PriorSpec& prior, const SamplerConfig& cfg, Eigen::Index n, std::span<const int> labels = {});

/// Deterministic encoding of observations (original units).
Matrix encode_deterministic(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Matrix& x);
/// Decoding back to original units.
Matrix decode(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Matrix& z1);

struct InversionRun {
  Matrix z1;  // encoded
  Matrix z0;  // inverted
  Matrix z1_roundtrip;
  /// |z1_roundtrip - z1|_F / |z1|_F
  double relative_error = 0.0;
};

/// Encode (deterministic) -> reverse ODE -> forward ODE. Requires gamma = 0.
InversionRun invert(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Schedule& s,
                    const SamplerConfig& cfg, const Matrix& x, std::span<const int> labels = {});

/// Worker count: cfg value, else LSI_THREADS, else hardware concurrency (>= 1).
int resolve_threads(int requested);

}  // namespace lsi
