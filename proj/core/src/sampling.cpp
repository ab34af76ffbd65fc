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

#include "lsi/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace lsi {
namespace {

constexpr std::uint64_t kPriorStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

Rng chain_rng(std::uint64_t seed, Eigen::Index chain, std::uint64_t purpose) {
  return Rng(seed).split(2 * static_cast<std::uint64_t>(chain) + purpose);
}

void require_linear(const Schedule& s) {
  if (s.kind != ScheduleKind::Linear) throw std::invalid_argument("the sampler supports the linear schedule only");
}

std::span<const int> block_labels(std::span<const int> labels, Eigen::Index r0, Eigen::Index m) {
  if (labels.empty()) return {};
  return labels.subspan(static_cast<std::size_t>(r0), static_cast<std::size_t>(m));
}

// Runs fn(block_index, first_row, rows) over fixed-size blocks on a small pool.
template <class Fn>
void for_blocks(Eigen::Index n, int block_size, int threads, Fn&& fn) {
  if (n == 0) return;
  const Eigen::Index b = std::max(1, block_size);
  const Eigen::Index blocks = (n + b - 1) / b;
  const int workers = static_cast<int>(std::min<Eigen::Index>(std::max(1, threads), blocks));
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const Eigen::Index k = next.fetch_add(1);
      if (k >= blocks || failed.load()) return;
      try {
        const Eigen::Index r0 = k * b;
        fn(k, r0, std::min(b, n - r0));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

void check_finite(const Matrix& z, double t, const char* what) {
  if (!z.allFinite()) throw std::runtime_error(std::string("non-finite state in ") + what + " at t = " + std::to_string(t));
}

// Drift of the probability-flow ODE (gamma = 0).
Matrix flow_velocity(const Schedule& s, const FieldFn& field, const Matrix& z, double t, std::span<const int> labels) {
  const FieldValue f = field(z, t, labels, true);
  const double sig = sde_coefficients(s, t).sigma_t;
  return f.h - 0.5 * sig * sig * f.score;
}

Matrix terminal_solve(const FieldFn& field, const Matrix& z1, double T, std::span<const int> labels) {
  // z1 = zT + (1 - T) h(zT, T); the map is a contraction for small 1 - T.
  Matrix z = z1;
  for (int it = 0; it < 200; ++it) {
    const Matrix next = z1 - (1.0 - T) * field(z, T, labels, false).h;
    const double change = (next - z).cwiseAbs().maxCoeff();
    z = next;
    if (change <= 1e-14 * (1.0 + z.cwiseAbs().maxCoeff())) break;
  }
  return z;
}

nn::ParameterStore* readonly(const nn::ParameterStore& store) {
  // Non-recording EMA tapes only read parameter values.
  return const_cast<nn::ParameterStore*>(&store);
}

}  // namespace

std::string_view to_string(GammaMode mode) { return mode == GammaMode::Constant ? "constant" : "decaying"; }

GammaMode gamma_mode_from_string(std::string_view name) {
  if (name == "constant") return GammaMode::Constant;
  if (name == "decaying") return GammaMode::Decaying;
  throw std::invalid_argument("unknown gamma mode '" + std::string(name) + "'");
}

std::string_view to_string(ScoreSource source) {
  return source == ScoreSource::FromDrift ? "from_drift" : "from_eps_head";
}

ScoreSource score_source_from_string(std::string_view name) {
  if (name == "from_drift") return ScoreSource::FromDrift;
  if (name == "from_eps_head") return ScoreSource::FromEpsHead;
  throw std::invalid_argument("unknown score source '" + std::string(name) + "'");
}

SamplerConfig preset_for(Parameterization p) {
  SamplerConfig cfg;
  cfg.parameterization = p;
  if (p == Parameterization::Denoising || p == Parameterization::NoisePred) cfg.step_grid_exponent = 2.0;
  return cfg;
}

void validate(const SamplerConfig& cfg, const PriorSpec& prior) {
  if (cfg.n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
  if (!std::isfinite(cfg.guidance_lambda)) throw std::invalid_argument("guidance lambda must be finite");
  if (!(cfg.step_grid_exponent > 0.0)) throw std::invalid_argument("step_grid_exponent must be positive");
  if (!(cfg.t_clip > 0.0 && cfg.t_clip < 0.5)) throw std::invalid_argument("t_clip must lie in (0, 0.5)");
  if (cfg.block_size < 1) throw std::invalid_argument("block_size must be >= 1");
  if (cfg.score_source == ScoreSource::FromDrift && !is_standard_normal(prior))
    throw std::invalid_argument("score_from_drift requires a standard normal prior; use the eps head");
}

double gamma_at(const SamplerConfig& cfg, double t) {
  return cfg.gamma_mode == GammaMode::Constant ? cfg.gamma : cfg.gamma * (1.0 - t);
}

std::vector<double> step_grid(const SamplerConfig& cfg) {
  if (cfg.n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  const double T = 1.0 - cfg.t_clip;
  std::vector<double> g(static_cast<std::size_t>(cfg.n_steps) + 1);
  for (int k = 0; k <= cfg.n_steps; ++k) {
    const double u = 1.0 - static_cast<double>(k) / cfg.n_steps;
    g[static_cast<std::size_t>(k)] = T * (1.0 - std::pow(u, cfg.step_grid_exponent));
  }
  g.back() = T;
  return g;
}

Vec score_from_drift(const Schedule& s, double t, const Vec& zt, const Vec& h) {
  require_linear(s);
  if (!(t < 1.0)) throw std::domain_error("score_from_drift needs t < 1");
  return (t * h - zt) / (s.sigma * s.sigma * t + 1.0 - t);
}

Matrix score_from_drift(const Schedule& s, double t, const Matrix& zt, const Matrix& h) {
  require_linear(s);
  if (!(t < 1.0)) throw std::domain_error("score_from_drift needs t < 1");
  return (t * h - zt) / (s.sigma * s.sigma * t + 1.0 - t);
}

Vec score_from_eps(const Schedule& s, double t, const Vec& eps_pred) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("score_from_eps needs 0 < t < 1");
  return -eps_pred / coefficients(s, t).eta;
}

Matrix score_from_eps(const Schedule& s, double t, const Matrix& eps_pred) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("score_from_eps needs 0 < t < 1");
  return -eps_pred / coefficients(s, t).eta;
}

Vec cfg_drift(const Vec& h_cond, const Vec& h_uncond, double lambda) {
  if (h_cond.size() != h_uncond.size()) throw std::invalid_argument("cfg_drift: shape mismatch");
  return (1.0 + lambda) * h_cond - lambda * h_uncond;
}

Matrix cfg_drift(const Matrix& h_cond, const Matrix& h_uncond, double lambda) {
  if (h_cond.rows() != h_uncond.rows() || h_cond.cols() != h_uncond.cols())
    throw std::invalid_argument("cfg_drift: shape mismatch");
  return (1.0 + lambda) * h_cond - lambda * h_uncond;
}

void sampler_step(const Schedule& s, Matrix& z, double t, double dt, const SamplerConfig& cfg, const FieldFn& field,
                  std::span<const int> labels, std::span<Rng> rngs) {
  if (!(dt > 0.0)) throw std::invalid_argument("sampler_step needs dt > 0");
  if (t + dt > 1.0 + 1e-12) throw std::invalid_argument("sampler_step overshoots t = 1");
  const double g = gamma_at(cfg, t);
  const double sig = sde_coefficients(s, t).sigma_t;
  const double score_weight = (1.0 - g * g) * 0.5 * sig * sig;
  const FieldValue f = field(z, t, labels, score_weight != 0.0);
  if (score_weight != 0.0) {
    z += dt * (f.h - score_weight * f.score);
  } else {
    z += dt * f.h;
  }
  if (g > 0.0) {
    if (static_cast<Eigen::Index>(rngs.size()) != z.rows()) throw std::invalid_argument("sampler_step: one rng per chain");
    const double scale = g * sig * std::sqrt(dt);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) += scale * rngs[static_cast<std::size_t>(i)].normal();
  }
  check_finite(z, t + dt, "sampler_step");
}

IntegrationResult integrate(const Schedule& s, const Matrix& z0, const SamplerConfig& cfg, const FieldFn& field,
                            std::span<const int> labels) {
  require_linear(s);
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != z0.rows())
    throw std::invalid_argument("label count differs from chain count");
  const std::vector<double> grid = step_grid(cfg);
  const double T = grid.back();
  const Eigen::Index n = z0.rows();
  const std::size_t n_norms = grid.size();
  const Eigen::Index b = cfg.block_size;
  const Eigen::Index blocks = n == 0 ? 0 : (n + b - 1) / b;
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(blocks), std::vector<double>(n_norms, 0.0));

  IntegrationResult out;
  out.z1.resize(n, z0.cols());
  for_blocks(n, cfg.block_size, resolve_threads(cfg.threads), [&](Eigen::Index k, Eigen::Index r0, Eigen::Index m) {
    Matrix z = z0.middleRows(r0, m);
    std::vector<Rng> rngs;
    rngs.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) rngs.push_back(chain_rng(cfg.seed, r0 + i, kNoiseStream));
    const auto labs = block_labels(labels, r0, m);
    auto& norms = partial[static_cast<std::size_t>(k)];
    for (std::size_t step = 0; step + 1 < grid.size(); ++step) {
      const Matrix prev = z;
      sampler_step(s, z, grid[step], grid[step + 1] - grid[step], cfg, field, labs, rngs);
      norms[step] = (z - prev).rowwise().norm().sum();
    }
    const Matrix zT = z;
    z += (1.0 - T) * field(z, T, labs, false).h;
    check_finite(z, 1.0, "terminal jump");
    norms.back() = (z - zT).rowwise().norm().sum();
    out.z1.middleRows(r0, m) = z;
  });
  out.step_norms.assign(n_norms, 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < n_norms; ++i) out.step_norms[i] += p[i];
  if (n > 0)
    for (double& v : out.step_norms) v /= static_cast<double>(n);
  return out;
}

Matrix invert_latents(const Schedule& s, const Matrix& z1, const SamplerConfig& cfg, const FieldFn& field,
                      std::span<const int> labels) {
  require_linear(s);
  if (cfg.gamma != 0.0) throw std::invalid_argument("inversion requires the deterministic sampler (gamma = 0)");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != z1.rows())
    throw std::invalid_argument("label count differs from chain count");
  const std::vector<double> grid = step_grid(cfg);
  Matrix z0(z1.rows(), z1.cols());
  for_blocks(z1.rows(), cfg.block_size, resolve_threads(cfg.threads),
             [&](Eigen::Index, Eigen::Index r0, Eigen::Index m) {
               const auto labs = block_labels(labels, r0, m);
               Matrix z = terminal_solve(field, z1.middleRows(r0, m), grid.back(), labs);
               for (std::size_t k = grid.size() - 1; k > 0; --k) {
                 z -= (grid[k] - grid[k - 1]) * flow_velocity(s, field, z, grid[k], labs);
                 check_finite(z, grid[k - 1], "inversion");
               }
               z0.middleRows(r0, m) = z;
             });
  return z0;
}

// ---- exact Gaussian oracle -----------------------------------------------------

namespace {

struct GaussianPosterior {
  Matrix centered;     // z_t - t m
  Eigen::RowVectorXd denom;  // t^2 S + (1 - t) V per dimension
};

GaussianPosterior gaussian_posterior(const Vec& m, const Vec& S, const Schedule& s, double t, const Matrix& zt) {
  require_linear(s);
  if (m.size() != zt.cols() || S.size() != zt.cols()) throw std::invalid_argument("exact Gaussian: dimension mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("exact Gaussian: t outside [0, 1]");
  const double v = s.sigma * s.sigma * t + 1.0 - t;
  GaussianPosterior g;
  g.centered = zt.rowwise() - t * m.transpose();
  g.denom = (t * t * S.array() + (1.0 - t) * v).matrix().transpose();
  return g;
}

}  // namespace

Matrix exact_gaussian_drift(const Vec& m, const Vec& S, const Schedule& s, double t, const Matrix& zt) {
  if (!(t < 1.0)) throw std::domain_error("exact_gaussian_drift is singular at t = 1");
  const GaussianPosterior g = gaussian_posterior(m, S, s, t, zt);
  const Eigen::RowVectorXd gain = (t * S.array()).matrix().transpose().cwiseQuotient(g.denom);
  Matrix e = g.centered.array().rowwise() * gain.array();
  e.rowwise() += m.transpose();
  return (e - zt) / (1.0 - t);
}

Vec exact_gaussian_drift(const Vec& m, const Vec& S, const Schedule& s, double t, const Vec& zt) {
  return exact_gaussian_drift(m, S, s, t, Matrix(zt.transpose())).row(0).transpose();
}

Matrix exact_gaussian_score(const Vec& m, const Vec& S, const Schedule& s, double t, const Matrix& zt) {
  const GaussianPosterior g = gaussian_posterior(m, S, s, t, zt);
  return -(g.centered.array().rowwise() / g.denom.array()).matrix();
}

Matrix exact_gaussian_eps(const Vec& m, const Vec& S, const Schedule& s, double t, const Matrix& zt) {
  const GaussianPosterior g = gaussian_posterior(m, S, s, t, zt);
  return coefficients(s, t).eta * (g.centered.array().rowwise() / g.denom.array()).matrix();
}

FieldFn exact_gaussian_field(const Vec& m, const Vec& S, const Schedule& s, const SamplerConfig& cfg) {
  require_linear(s);
  return [m, S, s, cfg](const Matrix& zt, double t, std::span<const int>, bool need_score) {
    FieldValue f;
    f.h = exact_gaussian_drift(m, S, s, t, zt);
    if (need_score) {
      f.score = cfg.score_source == ScoreSource::FromDrift ? score_from_drift(s, t, zt, f.h)
                                                           : score_from_eps(s, t, exact_gaussian_eps(m, S, s, t, zt));
    }
    return f;
  };
}

// ---- trained models ----------------------------------------------------------

FieldFn model_field(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Schedule& s,
                    const SamplerConfig& cfg) {
  require_linear(s);
  if (cfg.score_source == ScoreSource::FromEpsHead && !spec.drift.eps_head)
    throw std::invalid_argument("score source from_eps_head needs a model trained with an eps head");
  const nn::ParameterStore* st = &store;
  return [st, spec, s, cfg](const Matrix& zt, double t, std::span<const int> labels, bool need_score) {
    const double te = std::clamp(t, cfg.t_clip, 1.0 - cfg.t_clip);
    const Eigen::VectorXd tv = Eigen::VectorXd::Constant(zt.rows(), te);
    struct Pass {
      Matrix h;
      Matrix eps;
    };
    auto run = [&](std::span<const int> labs) {
      nn::Tape tape(readonly(*st), nn::ParamSource::Ema, false);
      const nn::DriftOutput o = nn::forward_drift(tape, spec.drift, tape.constant(zt), tv, labs);
      Pass p;
      p.h = drift_from_hat(cfg.parameterization, s, te, zt, o.hat.value());
      if (o.eps_hat.valid()) p.eps = o.eps_hat.value();
      return p;
    };
    const bool conditional = spec.drift.num_classes > 0;
    std::vector<int> null_labels;
    if (conditional) null_labels.assign(static_cast<std::size_t>(zt.rows()), -1);
    const std::span<const int> cond_labels = !conditional ? std::span<const int>{}
                                             : labels.empty() ? std::span<const int>(null_labels)
                                                              : labels;
    Pass p = run(cond_labels);
    if (conditional && cfg.guidance_lambda != 0.0) {
      const Pass u = run(null_labels);
      p.h = cfg_drift(p.h, u.h, cfg.guidance_lambda);
      if (p.eps.size()) p.eps = cfg_drift(p.eps, u.eps, cfg.guidance_lambda);
    }
    FieldValue f;
    f.h = std::move(p.h);
    if (need_score) {
      f.score = cfg.score_source == ScoreSource::FromDrift ? score_from_drift(s, te, zt, f.h)
                                                           : score_from_eps(s, te, p.eps);
    }
    return f;
  };
}

Matrix encode_deterministic(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Matrix& x) {
  nn::Tape tape(readonly(store), nn::ParamSource::Ema, false);
  Rng unused(0);
  const nn::EncoderOutput e =
      nn::forward_encoder(tape, spec.encoder, tape.constant(x * spec.obs_scale), unused, nn::EncodeMode::EvalDeterministic);
  return e.z1.value();
}

Matrix decode(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Matrix& z1) {
  nn::Tape tape(readonly(store), nn::ParamSource::Ema, false);
  return nn::forward_decoder(tape, spec.decoder, tape.constant(z1)).value() / spec.obs_scale;
}

SampleRun sample(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Schedule& s,
                 const PriorSpec& prior, const SamplerConfig& cfg, Eigen::Index n, std::span<const int> labels) {
  validate(cfg, prior);
  if (n < 0) throw std::invalid_argument("sample count must be >= 0");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("label count differs from sample count");
  for (int l : labels)
    if (l < -1 || l >= spec.drift.num_classes) throw std::invalid_argument("label out of range: " + std::to_string(l));
  const Eigen::Index d = spec.drift.latent_dim;

  PriorContext ctx;
  if (prior.kind == PriorKind::DataCoupledMixture) ctx.bank = &store.at("prior.bank").ema;
  if (prior.kind == PriorKind::LearnableGaussian) {
    ctx.store = &store;
    ctx.use_ema = true;
  }
  SampleRun run;
  run.z0.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng r = chain_rng(cfg.seed, i, kPriorStream);
    run.z0.row(i) = prior_sample(prior, 1, d, r, ctx);
  }
  const FieldFn field = model_field(store, spec, s, cfg);
  IntegrationResult res = integrate(s, run.z0, cfg, field, labels);
  run.latents = std::move(res.z1);
  run.step_norms = std::move(res.step_norms);
  run.observations = n == 0 ? Matrix(0, spec.decoder.obs_dim) : decode(store, spec, run.latents);
  return run;
}

InversionRun invert(const nn::ParameterStore& store, const nn::ModelSpec& spec, const Schedule& s,
                    const SamplerConfig& cfg, const Matrix& x, std::span<const int> labels) {
  if (cfg.gamma != 0.0) throw std::invalid_argument("inversion requires gamma = 0");
  const FieldFn field = model_field(store, spec, s, cfg);
  InversionRun run;
  run.z1 = encode_deterministic(store, spec, x);
  run.z0 = invert_latents(s, run.z1, cfg, field, labels);
  run.z1_roundtrip = integrate(s, run.z0, cfg, field, labels).z1;
  const double norm = run.z1.norm();
  run.relative_error = norm > 0.0 ? (run.z1_roundtrip - run.z1).norm() / norm : (run.z1_roundtrip - run.z1).norm();
  return run;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LSI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lsi
