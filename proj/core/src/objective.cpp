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

#include "lsi/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsi {
namespace {

void require_linear(const Schedule& s, const char* what) {
  if (s.kind != ScheduleKind::Linear)
    throw std::invalid_argument(std::string(what) + " is defined for the linear schedule only");
}

void require_interior(double t, const char* what) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error(std::string(what) + " needs 0 < t < 1, got " + std::to_string(t));
}

bool needs_gaussian(Parameterization p) {
  return p == Parameterization::Denoising || p == Parameterization::NoisePred;
}

struct DriftTerms {
  nn::Var drift;
  nn::Var eps;  // invalid without an eps head
  std::vector<double> t;
};

DriftTerms drift_objective(nn::Tape& tape, nn::Var z1, std::span<const int> labels, const nn::DriftSpec& drift,
                           const PriorSpec& prior, const Schedule& s, const LossConfig& cfg, Rng& rng) {
  require_linear(s, "the training objective");
  const Eigen::Index n = z1.rows();
  const Eigen::Index d = z1.cols();
  const bool gaussian = is_standard_normal(prior);
  if (needs_gaussian(cfg.parameterization) && !gaussian)
    throw std::invalid_argument(std::string(to_string(cfg.parameterization)) + " requires a standard normal prior");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("label count differs from batch size");

  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = sample_time(cfg.timechange_exponent, rng, cfg.t_clip);

  nn::Var z0;
  if (prior.kind == PriorKind::LearnableGaussian) {
    z0 = cfg.prior_reference_kl > 0.0 ? tape.constant(rng.normal_matrix(n, d)) : learnable_prior_sample(tape, n, d, rng);
  } else if (prior.kind == PriorKind::DataCoupledMixture) {
    const Matrix bank = z1.value();
    z0 = tape.constant(prior_sample(prior, n, d, rng, PriorContext{&bank, nullptr, false}));
  } else {
    z0 = tape.constant(prior_sample(prior, n, d, rng));
  }

  const double sig2 = s.sigma * s.sigma;
  const bool fast = cfg.gaussian_fast_path && gaussian && !drift.eps_head;
  nn::Var zt;
  nn::Var h_star;
  Matrix eps;
  if (fast) {
    Eigen::VectorXd zt_z0(n), h_z0(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = sig2 * t(i) + 1.0 - t(i);
      zt_z0(i) = std::sqrt((1.0 - t(i)) * v);
      h_z0(i) = -std::sqrt(v / (1.0 - t(i)));
    }
    zt = nn::add(nn::row_scale(z1, t), nn::row_scale(z0, zt_z0));
    h_star = nn::add(z1, nn::row_scale(z0, h_z0));
  } else {
    eps = rng.normal_matrix(n, d);
    Eigen::VectorXd kappa(n), nu(n), eta(n), dkappa(n), dnu(n), eps_coeff(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Coefficients c = coefficients(s, t(i));
      const SdeCoefficients sde = sde_coefficients(s, t(i));
      kappa(i) = c.kappa;
      nu(i) = c.nu;
      eta(i) = c.eta;
      dkappa(i) = c.dkappa;
      dnu(i) = c.dnu;
      eps_coeff(i) = c.deta - sde.sigma_t * sde.sigma_t / (2.0 * c.eta);
    }
    zt = nn::add(nn::add(nn::row_scale(z1, kappa), nn::row_scale(z0, nu)), tape.constant(eta.asDiagonal() * eps));
    h_star = nn::add(nn::add(nn::row_scale(z1, dkappa), nn::row_scale(z0, dnu)),
                     tape.constant(eps_coeff.asDiagonal() * eps));
  }

  Eigen::VectorXd a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const HatAffine m = hat_affine(cfg.parameterization, s, t(i));
    a(i) = m.zt_coeff;
    b(i) = m.h_coeff;
  }
  nn::Var target = nn::add(nn::row_scale(zt, a), nn::row_scale(h_star, b));

  std::vector<int> labs;
  if (drift.num_classes > 0) {
    labs.resize(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool drop = rng.uniform() < drift.label_drop;
      if (!drop && !labels.empty()) labs[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)];
    }
  }
  const nn::DriftOutput out = nn::forward_drift(tape, drift, zt, t, labs);

  DriftTerms terms;
  nn::Var diff = nn::sub(out.hat, target);
  if (cfg.exact_elbo_weighting) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = std::sqrt(0.5 * beta_weight(cfg.parameterization, s, t(i)));
    terms.drift = nn::scale(nn::mean_square(nn::row_scale(diff, w)), static_cast<double>(d));
  } else {
    terms.drift = nn::mean_square(diff);
  }
  if (drift.eps_head) {
    if (eps.size() == 0) eps = rng.normal_matrix(n, d);
    terms.eps = nn::mean_square(nn::sub(out.eps_hat, tape.constant(eps)));
  }
  terms.t.assign(t.data(), t.data() + n);
  return terms;
}

LossBreakdown finish(nn::Tape& tape, nn::Var recon, const DriftTerms& terms, const PriorSpec& prior,
                     const LossConfig& cfg) {
  LossBreakdown out;
  const double w = cfg.exact_elbo_weighting || !cfg.joint ? 1.0 : cfg.beta;
  nn::Var drift_part = terms.drift;
  if (terms.eps.valid()) drift_part = nn::add(drift_part, nn::scale(terms.eps, cfg.eps_head_weight));
  nn::Var obj = nn::scale(drift_part, w);
  if (recon.valid()) obj = nn::add(nn::scale(recon, cfg.recon_weight), obj);
  if (prior.kind == PriorKind::LearnableGaussian && cfg.prior_reference_kl > 0.0) {
    nn::Var kl = reference_prior_kl(tape);
    out.prior_kl = kl.scalar();
    obj = nn::add(obj, nn::scale(kl, cfg.prior_reference_kl));
  }
  out.objective = obj;
  out.total = obj.scalar();
  out.recon_term = recon.valid() ? recon.scalar() : 0.0;
  out.drift_term = terms.drift.scalar();
  out.eps_term = terms.eps.valid() ? terms.eps.scalar() : 0.0;
  out.t_values = terms.t;
  if (!std::isfinite(out.total))
    throw std::runtime_error("non-finite loss (recon " + std::to_string(out.recon_term) + ", drift " +
                             std::to_string(out.drift_term) + ", eps " + std::to_string(out.eps_term) + ")");
  return out;
}

}  // namespace

std::string_view to_string(Parameterization p) {
  switch (p) {
    case Parameterization::OrigFlow: return "orig_flow";
    case Parameterization::InterpFlow: return "interp_flow";
    case Parameterization::Denoising: return "denoising";
    case Parameterization::NoisePred: return "noise_pred";
  }
  return "unknown";
}

Parameterization parameterization_from_string(std::string_view name) {
  for (auto p : {Parameterization::OrigFlow, Parameterization::InterpFlow, Parameterization::Denoising,
                 Parameterization::NoisePred})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown parameterization '" + std::string(name) + "'");
}

void validate(const LossConfig& cfg) {
  if (!(cfg.timechange_exponent > 0.0)) throw std::invalid_argument("timechange_exponent must be positive");
  if (!(cfg.t_clip > 0.0 && cfg.t_clip < 0.5)) throw std::invalid_argument("t_clip must lie in (0, 0.5)");
  if (!(cfg.beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(cfg.recon_weight >= 0.0)) throw std::invalid_argument("recon_weight must be nonnegative");
}

Vec u_general(const Schedule& s, double t, const Vec& eps, const Vec& z0, const Vec& z1, const Vec& h_value) {
  require_interior(t, "u_general");
  if (eps.size() != z0.size() || z1.size() != z0.size() || h_value.size() != z0.size())
    throw std::invalid_argument("u_general: dimension mismatch");
  const Coefficients c = coefficients(s, t);
  const SdeCoefficients sde = sde_coefficients(s, t);
  const double sig2 = sde.sigma_t * sde.sigma_t;
  return ((c.deta - sig2 / (2.0 * c.eta)) * eps + c.dkappa * z1 + c.dnu * z0 - h_value) / sde.sigma_t;
}

double time_from_uniform(double c, double s) {
  if (!(c > 0.0)) throw std::invalid_argument("time change exponent must be positive");
  return 1.0 - std::pow(1.0 - s, c);
}

double sample_time(double c, Rng& rng, double t_clip) {
  if (!(t_clip >= 0.0 && t_clip < 0.5)) throw std::invalid_argument("t_clip must lie in [0, 0.5)");
  const double t = time_from_uniform(c, rng.uniform());
  return t_clip > 0.0 ? std::clamp(t, t_clip, 1.0 - t_clip) : t;
}

Vec gaussian_z0_zt(const Schedule& s, double t, const Vec& z1, const Vec& z0g) {
  require_linear(s, "gaussian_z0_zt");
  if (z1.size() != z0g.size()) throw std::invalid_argument("gaussian_z0_zt: dimension mismatch");
  const double sig2 = s.sigma * s.sigma;
  return t * z1 + std::sqrt((1.0 - t) * (sig2 * t + 1.0 - t)) * z0g;
}

HatAffine hat_affine(Parameterization p, const Schedule& s, double t) {
  require_linear(s, "parameterizations");
  const double sig2 = s.sigma * s.sigma;
  switch (p) {
    case Parameterization::OrigFlow: return {0.0, std::sqrt(1.0 - t)};
    case Parameterization::InterpFlow: return {std::sqrt(t), std::sqrt(1.0 - t)};
    case Parameterization::Denoising: return {1.0, 1.0 - t};
    case Parameterization::NoisePred: {
      const double root_v = std::sqrt(sig2 * t + 1.0 - t);
      return {std::sqrt(1.0 - t) / root_v, -t * std::sqrt(1.0 - t) / root_v};
    }
  }
  return {};
}

double beta_weight(Parameterization p, const Schedule& s, double t) {
  require_linear(s, "parameterizations");
  const double sig2 = s.sigma * s.sigma;
  switch (p) {
    case Parameterization::OrigFlow:
    case Parameterization::InterpFlow: return 1.0 / (sig2 * (1.0 - t));
    case Parameterization::Denoising: return 1.0 / ((1.0 - t) * (1.0 - t));
    case Parameterization::NoisePred: return (sig2 * t + 1.0 - t) / (t * t * (1.0 - t));
  }
  return 0.0;
}

HatTarget target_and_hat(Parameterization p, const Schedule& s, double t, const Vec& z0, const Vec& z1,
                         const Vec& eps, const Vec& zt, NoiseLayout layout) {
  require_linear(s, "target_and_hat");
  require_interior(t, "target_and_hat");
  if (needs_gaussian(p) && layout == NoiseLayout::Explicit)
    throw std::invalid_argument(std::string(to_string(p)) + " requires a standard normal prior");
  if (z0.size() != z1.size() || zt.size() != z1.size()) throw std::invalid_argument("target_and_hat: dimension mismatch");
  const double sig2 = s.sigma * s.sigma;
  Vec h_star;
  if (layout == NoiseLayout::Combined) {
    h_star = z1 - std::sqrt((sig2 * t + 1.0 - t) / (1.0 - t)) * z0;
  } else {
    if (eps.size() != z1.size()) throw std::invalid_argument("target_and_hat: eps dimension mismatch");
    h_star = z1 - z0 - s.sigma * std::sqrt(t / (1.0 - t)) * eps;
  }
  HatTarget out;
  out.hat_of_h = hat_affine(p, s, t);
  out.target = out.hat_of_h.zt_coeff * zt + out.hat_of_h.h_coeff * h_star;
  out.beta_t = beta_weight(p, s, t);
  return out;
}

Vec drift_from_hat(Parameterization p, const Schedule& s, double t, const Vec& zt, const Vec& hat) {
  if (p == Parameterization::NoisePred && !(t > 0.0)) throw std::domain_error("noise prediction drift is singular at t = 0");
  if (!(t < 1.0)) throw std::domain_error("drift_from_hat is singular at t = 1");
  const HatAffine m = hat_affine(p, s, t);
  return (hat - m.zt_coeff * zt) / m.h_coeff;
}

Matrix drift_from_hat(Parameterization p, const Schedule& s, double t, const Matrix& zt, const Matrix& hat) {
  if (p == Parameterization::NoisePred && !(t > 0.0)) throw std::domain_error("noise prediction drift is singular at t = 0");
  if (!(t < 1.0)) throw std::domain_error("drift_from_hat is singular at t = 1");
  const HatAffine m = hat_affine(p, s, t);
  return (hat - m.zt_coeff * zt) / m.h_coeff;
}

LossBreakdown lsi_loss(nn::Tape& tape, const Matrix& x, std::span<const int> labels, const nn::ModelSpec& model,
                       const PriorSpec& prior, const Schedule& s, const LossConfig& cfg, Rng& rng) {
  validate(cfg);
  if (x.rows() == 0) throw std::invalid_argument("empty batch");
  nn::Var xv = tape.constant(x * model.obs_scale);
  const nn::EncoderOutput enc = nn::forward_encoder(tape, model.encoder, xv, rng, nn::EncodeMode::Train);
  nn::Var x_hat = nn::forward_decoder(tape, model.decoder, enc.z1);
  nn::Var recon = nn::mean_square(nn::sub(x_hat, xv));
  nn::Var z1 = cfg.joint ? enc.z1 : nn::stop_gradient(enc.z1);
  const DriftTerms terms = drift_objective(tape, z1, labels, model.drift, prior, s, cfg, rng);
  return finish(tape, recon, terms, prior, cfg);
}

LossBreakdown osi_loss(nn::Tape& tape, const Matrix& x, std::span<const int> labels, const nn::DriftSpec& drift,
                       const PriorSpec& prior, const Schedule& s, const LossConfig& cfg, Rng& rng) {
  validate(cfg);
  if (x.rows() == 0) throw std::invalid_argument("empty batch");
  nn::Var z1 = tape.constant(x);
  const DriftTerms terms = drift_objective(tape, z1, labels, drift, prior, s, cfg, rng);
  return finish(tape, nn::Var{}, terms, prior, cfg);
}

PathKlEstimate path_kl_estimate(const Schedule& s, const DriftFn& drift, const VecSampler& data_sampler,
                                const VecSampler& prior_sampler, std::int64_t n_mc, Rng& rng, double t_clip) {
  if (n_mc < 1) throw std::invalid_argument("path_kl_estimate needs n_mc >= 1");
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    const double t = sample_time(1.0, rng, t_clip);
    const Vec z1 = data_sampler(rng);
    const Vec z0 = prior_sampler(rng);
    const Vec eps = rng.normal_vector(z1.size());
    const Vec zt = interpolant_with_noise(s, t, z0, z1, eps);
    const Vec u = u_general(s, t, eps, z0, z1, drift(zt, t));
    const double v = 0.5 * u.squaredNorm();
    if (!std::isfinite(v)) throw std::runtime_error("non-finite u in path KL estimate at t = " + std::to_string(t));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  PathKlEstimate out;
  out.value = mean;
  out.std_error = n_mc > 1 ? std::sqrt(m2 / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc)) : 0.0;
  return out;
}

}  // namespace lsi
