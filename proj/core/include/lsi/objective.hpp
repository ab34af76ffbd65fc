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

// Training objective derived from the continuous-time ELBO.
//
// For the interpolant z_t = eta eps + kappa z1 + nu z0 the Girsanov integrand is
//
//   u(z_t, t) = sigma_t^{-1} [ (eta' - sigma_t^2 / (2 eta)) eps + kappa' z1 + nu' z0 - h(z_t, t) ]
//
// so the drift regresses onto h* = (eta' - sigma_t^2/(2 eta)) eps + kappa' z1 + nu' z0.
// Each parameterization trains hat = A(t) z_t + B(t) h instead of h; its
// regression target is A z_t + B h*.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lsi/bridge.hpp"
#include "lsi/data.hpp"
#include "lsi/nn/model.hpp"
#include "lsi/nn/tape.hpp"
#include "lsi/rng.hpp"
#include "lsi/schedules.hpp"

namespace lsi {

enum class Parameterization { OrigFlow, InterpFlow, Denoising, NoisePred };

std::string_view to_string(Parameterization p);
Parameterization parameterization_from_string(std::string_view name);

struct LossConfig {
  Parameterization parameterization = Parameterization::InterpFlow;
  /// Weight of the drift term relative to reconstruction (joint mode).
  double beta = 1e-4;
  /// Exponent c of the time change t(s) = 1 - (1 - s)^c.
  double timechange_exponent = 1.0;
  /// false blocks the drift-term gradient into z1 (two-stage regime); the
  /// drift network then trains at unit weight and beta only scales reporting.
  bool joint = true;
  double t_clip = 1e-3;
  double recon_weight = 1.0;
  /// Weight of the auxiliary ||eps - eps_hat||^2 term when the drift has an eps head.
  double eps_head_weight = 1.0;
  /// Weight of KL(N(0, I) || p_theta) for a learnable prior with a fixed
  /// reference q0; 0 uses the shared-prior construction.
  double prior_reference_kl = 0.0;
  /// Combine eps and z0 for standard normal priors (same law, fewer draws).
  bool gaussian_fast_path = true;
  /// Weight each sample by its parameterization's natural beta_t / 2 and sum
  /// over dimensions, so that with c = 1 the drift term estimates
  /// 1/2 E int ||u||^2 dt (beta_t = sigma^-2 on the h residual).
  bool exact_elbo_weighting = false;
};

/// Throws std::invalid_argument when an invariant is violated.
void validate(const LossConfig& cfg);

struct LossBreakdown {
  double total = 0.0;
  double recon_term = 0.0;
  double drift_term = 0.0;
  double eps_term = 0.0;
  double prior_kl = 0.0;
  std::vector<double> t_values;
  /// The scalar to differentiate; lives on the tape passed to the loss.
  nn::Var objective;
};

Vec u_general(const Schedule& s, double t, const Vec& eps, const Vec& z0, const Vec& z1, const Vec& h_value);

/// t(s) = 1 - (1 - s)^c.
double time_from_uniform(double c, double s);
/// s ~ U(0,1) mapped through time_from_uniform, so P(t <= x) = 1 - (1 - x)^(1/c).
/// A positive t_clip clamps the result to [t_clip, 1 - t_clip]; the loss does
/// this, the law itself is unclipped (default).
double sample_time(double c, Rng& rng, double t_clip = 0.0);

/// Linear schedule with z0g ~ N(0, I): z_t = t z1 + sqrt((1-t)(sigma^2 t + 1 - t)) z0g.
Vec gaussian_z0_zt(const Schedule& s, double t, const Vec& z1, const Vec& z0g);

/// hat = zt_coeff * z_t + h_coeff * h.
struct HatAffine {
  double zt_coeff = 0.0;
  double h_coeff = 1.0;
};

HatAffine hat_affine(Parameterization p, const Schedule& s, double t);

/// How z0 enters the interpolant passed to target_and_hat.
enum class NoiseLayout {
  Explicit,          // z_t = eta eps + kappa z1 + nu z0, any prior
  ExplicitGaussian,  // same, z0 ~ N(0, I)
  Combined,          // z_t = t z1 + sqrt((1-t)(sigma^2 t+1-t)) z0, z0 ~ N(0, I); eps unused
};

struct HatTarget {
  Vec target;
  double beta_t = 0.0;
  HatAffine hat_of_h;
};

/// Regression target for hat, its natural weight beta_t and the affine map
/// from h. Linear schedule only. Denoising and NoisePred need a Gaussian layout.
HatTarget target_and_hat(Parameterization p, const Schedule& s, double t, const Vec& z0, const Vec& z1,
                         const Vec& eps, const Vec& zt, NoiseLayout layout);

/// Natural per-time weight of each parameterization.
double beta_weight(Parameterization p, const Schedule& s, double t);

/// Inverse of hat_affine: h = (hat - A z_t) / B.
Vec drift_from_hat(Parameterization p, const Schedule& s, double t, const Vec& zt, const Vec& hat);
Matrix drift_from_hat(Parameterization p, const Schedule& s, double t, const Matrix& zt, const Matrix& hat);

/// Latent model objective: reconstruction + beta * drift regression. Records
/// on tape (whose store holds the model); call tape.backward(result.objective).
LossBreakdown lsi_loss(nn::Tape& tape, const Matrix& x, std::span<const int> labels, const nn::ModelSpec& model,
                       const PriorSpec& prior, const Schedule& s, const LossConfig& cfg, Rng& rng);

/// Observation-space objective: the drift term with z1 = x and no codec.
LossBreakdown osi_loss(nn::Tape& tape, const Matrix& x, std::span<const int> labels, const nn::DriftSpec& drift,
                       const PriorSpec& prior, const Schedule& s, const LossConfig& cfg, Rng& rng);

struct PathKlEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

using DriftFn = std::function<Vec(const Vec& zt, double t)>;
using VecSampler = std::function<Vec(Rng&)>;

/// Monte-Carlo estimate of 1/2 E int ||u||^2 dt with t from sample_time(c = 1)
/// and the explicit-noise interpolant.
PathKlEstimate path_kl_estimate(const Schedule& s, const DriftFn& drift, const VecSampler& data_sampler,
                                const VecSampler& prior_sampler, std::int64_t n_mc, Rng& rng, double t_clip = 1e-3);

}  // namespace lsi
