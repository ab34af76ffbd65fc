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

#include "app/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lsi/bridge.hpp"
#include "lsi/data.hpp"
#include "lsi/eval.hpp"
#include "lsi/nn/tape.hpp"
#include "lsi/objective.hpp"
#include "lsi/sampling.hpp"
#include "lsi/schedules.hpp"

namespace lsi::app {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

CheckResult verdict(bool ok, std::string detail, Json metrics = Json::object()) {
  CheckResult r;
  r.passed = ok;
  r.detail = std::move(detail);
  r.metrics = std::move(metrics);
  return r;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

const Vec& target_mean() {
  static const Vec m = (Vec(2) << 1.0, -1.0).finished();
  return m;
}
const Vec& target_var() {
  static const Vec v = (Vec(2) << 0.5, 2.0).finished();
  return v;
}

// Randomizes every trainable array (including zero-initialized output layers).
void perturb(nn::ParameterStore& store, double scale, Rng& rng) {
  for (auto& e : store.entries()) {
    if (!e.trainable) continue;
    e.value = scale * rng.normal_matrix(e.value.rows(), e.value.cols());
  }
  store.sync_ema();
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Json SuiteReport::to_json() const {
  Json j;
  j["suite"] = suite;
  j["passed"] = passed();
  Json arr = Json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds},
                   {"metrics", c.metrics}});
  j["checks"] = arr;
  return j;
}

CheckResult run_check(const std::string& name, const std::function<CheckResult()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r = verdict(false, std::string("exception: ") + e.what());
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

CheckResult check_schedule_algebra(int n_times, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (ScheduleKind kind : {ScheduleKind::Linear, ScheduleKind::VariancePreserving}) {
    for (int i = 0; i < n_times; ++i) {
      const double sigma = kind == ScheduleKind::Linear ? 0.2 + 2.0 * rng.uniform() : 1.0;
      const Schedule s = make_schedule(kind, sigma);
      const double t = rng.uniform();
      const Coefficients c = coefficients(s, t);
      const TransitionKernel k0t = transition(s, 0.0, t);
      const TransitionKernel kt1 = transition(s, t, 1.0);
      const SdeCoefficients sde = sde_coefficients(s, t);
      // bridge conditioning: kappa, nu, eta^2 from the transition kernels
      worst = std::max(worst, rel_diff(c.eta * c.eta, k0t.b_st * kt1.b_st / s.b01));
      worst = std::max(worst, rel_diff(c.kappa, kt1.a_st * k0t.b_st / s.b01));
      worst = std::max(worst, rel_diff(c.nu, k0t.a_st * kt1.b_st / s.b01));
      // b01 = a_t1^2 b_0t + b_t1 and a01 = a_0t a_t1
      worst = std::max(worst, rel_diff(s.b01, kt1.a_st * kt1.a_st * k0t.b_st + kt1.b_st));
      worst = std::max(worst, rel_diff(s.a01, k0t.a_st * kt1.a_st));
      if (kind == ScheduleKind::Linear) {
        worst = std::max(worst, rel_diff(sde.h, 1.0 / (1.0 + t)));
        worst = std::max(worst, rel_diff(sde.sigma_t, sigma));
      } else {
        worst = std::max(worst, rel_diff(sde.h, 0.0));
        worst = std::max(worst, rel_diff(sde.sigma_t * sde.sigma_t, 1.0 / std::sqrt(t)));
      }
      // generic conversion from (kappa, nu)
      const auto fk = [&](double u) { return coefficients(s, u).kappa; };
      const auto fn = [&](double u) { return coefficients(s, u).nu; };
      const auto fdk = [&](double u) { return coefficients(s, u).dkappa; };
      const auto fdn = [&](double u) { return coefficients(s, u).dnu; };
      const ConvertedCoefficients cc = coeffs_from_kappa_nu(fk, fn, fdk, fdn, s.a01, s.b01, t);
      worst = std::max(worst, rel_diff(cc.h, sde.h));
      worst = std::max(worst, rel_diff(cc.sigma_sq, sde.sigma_t * sde.sigma_t));
      worst = std::max(worst, rel_diff(cc.eta, c.eta));
    }
  }
  return verdict(worst < 1e-10, "max relative error " + fmt(worst) + " (tol 1e-10)", {{"max_error", worst}});
}

CheckResult check_bridge_oracle(ScheduleKind kind, int n_paths, int n_steps, std::uint64_t seed) {
  const Schedule s = make_schedule(kind, 1.0);
  const Vec z0 = (Vec(2) << 0.5, -1.0).finished();
  const Vec z1 = (Vec(2) << 2.0, 1.0).finished();
  const std::vector<double> times{0.25, 0.5, 0.75};
  std::vector<Matrix> at(times.size(), Matrix(n_paths, 2));
  Rng root(seed);
  for (int p = 0; p < n_paths; ++p) {
    Rng rng = root.split(static_cast<std::uint64_t>(p));
    const std::vector<Vec> path = simulate_bridge(s, z0, z1, n_steps, rng);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto idx = static_cast<std::size_t>(std::lround(times[k] * n_steps));
      at[k].row(p) = path[idx].transpose();
    }
  }
  double worst_z = 0.0;
  Json per_t = Json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const GaussianDensity g = bridge_density(s, times[k], z0, z1);
    const MomentCheck mc = gaussian_moment_check(at[k], g.mean, Vec::Constant(2, g.var));
    worst_z = std::max(worst_z, mc.max_abs_z());
    per_t.push_back({{"t", times[k]}, {"max_abs_z", mc.max_abs_z()}});
  }
  return verdict(worst_z < 3.0,
                 std::string(to_string(kind)) + ": worst |z| " + fmt(worst_z) + " over mean/var at t=1/4,1/2,3/4 (tol 3)",
                 {{"max_abs_z", worst_z}, {"per_time", per_t}});
}

CheckResult check_interpolant_moments(int n_draws, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (ScheduleKind kind : {ScheduleKind::Linear, ScheduleKind::VariancePreserving}) {
    const Schedule s = make_schedule(kind, 0.8);
    const double t = 0.3;
    const Vec z0 = (Vec(2) << -1.0, 0.5).finished();
    const Vec z1 = (Vec(2) << 1.5, 2.0).finished();
    Matrix draws(n_draws, 2);
    for (int i = 0; i < n_draws; ++i) draws.row(i) = sample_interpolant(s, t, z0, z1, rng).zt.transpose();
    const GaussianDensity g = bridge_density(s, t, z0, z1);
    worst = std::max(worst, gaussian_moment_check(draws, g.mean, Vec::Constant(2, g.var)).max_abs_z());
  }
  return verdict(worst < 3.0, "worst |z| " + fmt(worst) + " (tol 3)", {{"max_abs_z", worst}});
}

CheckResult check_time_change(const std::vector<double>& exponents, int n_draws, std::uint64_t seed) {
  double worst = 0.0;
  Json per_c = Json::array();
  for (double c : exponents) {
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(c * 1000));
    std::vector<double> t(static_cast<std::size_t>(n_draws));
    for (double& v : t) v = sample_time(c, rng);
    std::sort(t.begin(), t.end());
    double ks = 0.0;
    const double n = static_cast<double>(n_draws);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f = 1.0 - std::pow(1.0 - t[i], 1.0 / c);
      ks = std::max({ks, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
    }
    worst = std::max(worst, ks);
    per_c.push_back({{"c", c}, {"ks", ks}});
  }
  return verdict(worst < 0.01, "max KS " + fmt(worst) + " (tol 0.01)", {{"max_ks", worst}, {"per_exponent", per_c}});
}

CheckResult check_parameterizations(int n_random, std::uint64_t seed) {
  Rng rng(seed);
  const Parameterization all[] = {Parameterization::OrigFlow, Parameterization::InterpFlow,
                                  Parameterization::Denoising, Parameterization::NoisePred};
  double round_trip = 0.0;
  for (int i = 0; i < n_random; ++i) {
    const Schedule s = make_schedule(ScheduleKind::Linear, 0.3 + 1.5 * rng.uniform());
    const double t = 0.01 + 0.98 * rng.uniform();
    const Vec zt = 2.0 * rng.normal_vector(3);
    const Vec h = 2.0 * rng.normal_vector(3);
    for (Parameterization p : all) {
      const HatAffine m = hat_affine(p, s, t);
      const Vec hat = m.zt_coeff * zt + m.h_coeff * h;
      round_trip = std::max(round_trip, (drift_from_hat(p, s, t, zt, hat) - h).cwiseAbs().maxCoeff() /
                                            std::max(1.0, h.cwiseAbs().maxCoeff()));
    }
  }

  // Bayes optimum of each regression target under N(0, I) -> N(m, diag S).
  double optimum = 0.0;
  const Vec& mean = target_mean();
  const Vec& var = target_var();
  for (double sigma : {1.0, 0.6}) {
    const Schedule s = make_schedule(ScheduleKind::Linear, sigma);
    for (int k = 1; k <= 19; ++k) {
      const double t = 0.05 * k;
      const double v = sigma * sigma * t + 1.0 - t;
      const double eta = sigma * std::sqrt(t * (1.0 - t));
      for (int j = 0; j < 8; ++j) {
        const Vec zt = t * mean + 1.5 * rng.normal_vector(2);
        const Vec centered = zt - t * mean;
        const Vec denom = (t * t * var.array() + (1.0 - t) * v).matrix();
        const Vec e_z1 = mean + (t * var.array() * centered.array() / denom.array()).matrix();
        const Vec e_z0 = ((1.0 - t) * centered.array() / denom.array()).matrix();
        const Vec e_eps = (eta * centered.array() / denom.array()).matrix();
        const Vec e_h = e_z1 - e_z0 - sigma * std::sqrt(t / (1.0 - t)) * e_eps;
        const Vec e_z0g = ((1.0 - t) * e_z0 + eta * e_eps) / std::sqrt((1.0 - t) * v);
        const Vec reference = exact_gaussian_drift(mean, var, s, t, zt);
        for (Parameterization p : all) {
          const HatAffine m = hat_affine(p, s, t);
          Vec hat;
          switch (p) {
            case Parameterization::OrigFlow:
            case Parameterization::InterpFlow: hat = m.zt_coeff * zt + m.h_coeff * e_h; break;
            case Parameterization::Denoising: hat = e_z1; break;
            case Parameterization::NoisePred: hat = e_z0g; break;
          }
          optimum = std::max(optimum, (drift_from_hat(p, s, t, zt, hat) - reference).cwiseAbs().maxCoeff());
        }
      }
    }
  }
  const bool ok = round_trip < 1e-12 && optimum < 1e-8;
  return verdict(ok, "round trip " + fmt(round_trip) + " (tol 1e-12), optimum spread " + fmt(optimum) + " (tol 1e-8)",
                 {{"round_trip", round_trip}, {"optimum", optimum}});
}

CheckResult check_objective_reduction(std::uint64_t seed) {
  nn::ModelSpec spec;
  spec.encoder.kind = nn::CodecKind::Identity;
  spec.encoder.obs_dim = 2;
  spec.encoder.latent_dim = 2;
  spec.decoder.kind = nn::CodecKind::Identity;
  spec.decoder.latent_dim = 2;
  spec.decoder.obs_dim = 2;
  spec.drift.latent_dim = 2;
  spec.drift.hidden = {16};
  spec.drift.time_embed_dim = 4;
  nn::ParameterStore store;
  Rng init(seed);
  nn::init_model(store, spec, init);
  perturb(store, 0.3, init);
  const Matrix x = init.normal_matrix(32, 2);
  const Schedule s = make_schedule(ScheduleKind::Linear, 1.0);
  double worst = 0.0;
  for (Parameterization p : {Parameterization::OrigFlow, Parameterization::InterpFlow, Parameterization::Denoising,
                             Parameterization::NoisePred}) {
    LossConfig cfg;
    cfg.parameterization = p;
    cfg.recon_weight = 0.0;
    Rng a(seed + 1), b(seed + 1);
    nn::Tape ta(&store), tb(&store);
    const LossBreakdown la = lsi_loss(ta, x, {}, spec, PriorSpec{}, s, cfg, a);
    const LossBreakdown lb = osi_loss(tb, x, {}, spec.drift, PriorSpec{}, s, cfg, b);
    worst = std::max(worst, std::abs(la.total - lb.total));
  }
  return verdict(worst <= 1e-12, "identity-codec LSI minus observation-space loss " + fmt(worst) + " (tol 1e-12)",
                 {{"max_difference", worst}});
}

nn::ModelSpec tiny_model_spec() {
  nn::ModelSpec spec;
  spec.encoder.obs_dim = 4;
  spec.encoder.hidden = {3};
  spec.encoder.latent_dim = 2;
  spec.encoder.noise_mode = nn::NoiseMode::Learned;
  spec.decoder.latent_dim = 2;
  spec.decoder.hidden = {3};
  spec.decoder.obs_dim = 4;
  spec.drift.latent_dim = 2;
  spec.drift.hidden = {4};
  spec.drift.time_embed_dim = 4;
  return spec;
}

CheckResult check_joint_stop_gradient(std::uint64_t seed) {
  const nn::ModelSpec spec = tiny_model_spec();
  nn::ParameterStore store;
  Rng init(seed);
  nn::init_model(store, spec, init);
  perturb(store, 0.3, init);
  const Matrix x = init.normal_matrix(16, 4);
  const Schedule s = make_schedule(ScheduleKind::Linear, 1.0);
  auto encoder_grad = [&](bool joint) {
    LossConfig cfg;
    cfg.joint = joint;
    cfg.recon_weight = 0.0;
    cfg.beta = 1.0;
    store.zero_grad();
    Rng rng(seed + 7);
    nn::Tape tape(&store);
    const LossBreakdown l = lsi_loss(tape, x, {}, spec, PriorSpec{}, s, cfg, rng);
    tape.backward(l.objective);
    double g = 0.0;
    for (const auto& e : store.entries())
      if (e.name.rfind("encoder.", 0) == 0 && e.trainable) g = std::max(g, e.grad.cwiseAbs().maxCoeff());
    return g;
  };
  const double blocked = encoder_grad(false);
  const double joint = encoder_grad(true);
  return verdict(blocked == 0.0 && joint > 0.0,
                 "encoder gradient from drift term: stop-grad " + fmt(blocked) + ", joint " + fmt(joint),
                 {{"stop_gradient", blocked}, {"joint", joint}});
}

CheckResult check_gradients(int n_directions, std::uint64_t seed) {
  const nn::ModelSpec spec = tiny_model_spec();
  nn::ParameterStore store;
  Rng init(seed);
  nn::init_model(store, spec, init);
  perturb(store, 0.1, init);
  const std::size_t n_params = store.num_scalars();
  if (n_params > 100) return verdict(false, "gradient-check model has " + std::to_string(n_params) + " parameters");
  const Matrix x = init.normal_matrix(8, 4);
  const Schedule s = make_schedule(ScheduleKind::Linear, 1.0);
  LossConfig cfg;
  cfg.beta = 0.5;  // both terms visible in every parameter's gradient
  auto loss_at = [&](const Eigen::VectorXd& theta) {
    store.set_flat_values(theta);
    Rng rng(seed + 11);
    nn::Tape tape(&store, nn::ParamSource::Live, false);
    return lsi_loss(tape, x, {}, spec, PriorSpec{}, s, cfg, rng).total;
  };
  const Eigen::VectorXd theta = store.flat_values();
  store.set_flat_values(theta);
  store.zero_grad();
  {
    Rng rng(seed + 11);
    nn::Tape tape(&store);
    const LossBreakdown l = lsi_loss(tape, x, {}, spec, PriorSpec{}, s, cfg, rng);
    tape.backward(l.objective);
  }
  const Eigen::VectorXd grad = store.flat_grads();
  const double h = 1e-4;
  double worst = 0.0;
  Rng dir_rng(seed + 13);
  for (int k = 0; k < n_directions; ++k) {
    Eigen::VectorXd v = dir_rng.normal_vector(theta.size());
    v.normalize();
    const double fd = (loss_at(theta + h * v) - loss_at(theta - h * v)) / (2.0 * h);
    const double an = grad.dot(v);
    worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}));
  }
  store.set_flat_values(theta);
  return verdict(worst < 1e-4,
                 std::to_string(n_params) + " parameters, " + std::to_string(n_directions) +
                     " directions, max relative error " + fmt(worst) + " (tol 1e-4)",
                 {{"parameters", n_params}, {"max_relative_error", worst}});
}

CheckResult check_sampler_marginals(const std::vector<double>& gammas, Eigen::Index n_samples, int n_steps,
                                    std::uint64_t seed) {
  const Schedule s = make_schedule(ScheduleKind::Linear, 1.0);
  const Vec& mean = target_mean();
  const Vec& var = target_var();
  bool ok = true;
  std::ostringstream detail;
  Json per = Json::array();
  for (double g : gammas) {
    SamplerConfig cfg;
    cfg.n_steps = n_steps;
    cfg.gamma = g;
    cfg.seed = seed;
    Rng rng(seed);
    const Matrix z0 = rng.normal_matrix(n_samples, 2);
    const IntegrationResult res = integrate(s, z0, cfg, exact_gaussian_field(mean, var, s, cfg));
    const MomentCheck mc = gaussian_moment_check(res.z1, mean, var);
    const double mean_err = mc.mean_error.cwiseAbs().maxCoeff();
    const double var_err = mc.var_rel_error.cwiseAbs().maxCoeff();
    const bool pass = mean_err < 0.05 && var_err < 0.05;
    ok = ok && pass;
    detail << "gamma " << g << ": mean err " << fmt(mean_err) << ", var rel err " << fmt(var_err) << "; ";
    per.push_back({{"gamma", g}, {"mean_error", mean_err}, {"var_rel_error", var_err}, {"max_abs_z", mc.max_abs_z()}});
  }
  detail << "(tol 0.05 / 5%)";
  return verdict(ok, detail.str(), {{"per_gamma", per}});
}

CheckResult check_score_agreement(int n_points, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const Schedule s = make_schedule(ScheduleKind::Linear, 0.5 + rng.uniform());
    const double t = 0.01 + 0.98 * rng.uniform();
    const Matrix zt = 2.0 * rng.normal_matrix(1, 2);
    const Matrix h = exact_gaussian_drift(target_mean(), target_var(), s, t, zt);
    const Matrix a = score_from_drift(s, t, zt, h);
    const Matrix b = score_from_eps(s, t, exact_gaussian_eps(target_mean(), target_var(), s, t, zt));
    const Matrix c = exact_gaussian_score(target_mean(), target_var(), s, t, zt);
    worst = std::max({worst, (a - b).cwiseAbs().maxCoeff(), (a - c).cwiseAbs().maxCoeff()});
  }
  return verdict(worst < 1e-8, "max |score_from_drift - score_from_eps| " + fmt(worst) + " (tol 1e-8)",
                 {{"max_difference", worst}});
}

CheckResult check_cfg_identities(Eigen::Index n_samples, int n_steps, std::uint64_t seed) {
  nn::ModelSpec spec = tiny_model_spec();
  spec.drift.num_classes = 3;
  spec.drift.hidden = {16};
  nn::ParameterStore store;
  Rng init(seed);
  nn::init_model(store, spec, init);
  perturb(store, 0.5, init);
  const Schedule s = make_schedule(ScheduleKind::Linear, 1.0);
  std::vector<int> labels(static_cast<std::size_t>(n_samples));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);

  // Reference fields built directly from the network, one pass each.
  auto reference = [&](bool conditional, const SamplerConfig& cfg) -> FieldFn {
    return [&, conditional, cfg](const Matrix& zt, double t, std::span<const int> labs, bool need_score) {
      const double te = std::clamp(t, cfg.t_clip, 1.0 - cfg.t_clip);
      std::vector<int> use(static_cast<std::size_t>(zt.rows()), -1);
      if (conditional) use.assign(labs.begin(), labs.end());
      nn::Tape tape(&store, nn::ParamSource::Ema, false);
      const nn::DriftOutput o =
          nn::forward_drift(tape, spec.drift, tape.constant(zt), Eigen::VectorXd::Constant(zt.rows(), te), use);
      FieldValue f;
      f.h = drift_from_hat(cfg.parameterization, s, te, zt, o.hat.value());
      if (need_score) f.score = score_from_drift(s, te, zt, f.h);
      return f;
    };
  };
  auto bits_equal = [](const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
  };
  SamplerConfig cfg;
  cfg.n_steps = n_steps;
  cfg.seed = seed;
  cfg.guidance_lambda = 0.0;
  const SampleRun cond = sample(store, spec, s, PriorSpec{}, cfg, n_samples, labels);
  const bool same_cond = bits_equal(cond.latents, integrate(s, cond.z0, cfg, reference(true, cfg), labels).z1);
  cfg.guidance_lambda = -1.0;
  const SampleRun uncond = sample(store, spec, s, PriorSpec{}, cfg, n_samples, labels);
  const bool same_uncond = bits_equal(uncond.latents, integrate(s, uncond.z0, cfg, reference(false, cfg), labels).z1);
  cfg.guidance_lambda = 2.0;
  const SampleRun guided = sample(store, spec, s, PriorSpec{}, cfg, n_samples, labels);
  const bool guided_differs = !bits_equal(guided.latents, cond.latents);
  return verdict(same_cond && same_uncond && guided_differs,
                 std::string("lambda=0 ") + (same_cond ? "bit-identical" : "DIFFERS") + " to conditional; lambda=-1 " +
                     (same_uncond ? "bit-identical" : "DIFFERS") + " to unconditional; lambda=2 " +
                     (guided_differs ? "differs" : "IDENTICAL"),
                 {{"lambda0", same_cond}, {"lambda_minus1", same_uncond}});
}

CheckResult check_inversion_closed_form(Eigen::Index n_samples, int n_steps, std::uint64_t seed) {
  // Zero drift with the drift-derived score: dz/dt = sigma^2 z / (2 V(t)),
  // V(t) = 1 + (sigma^2 - 1) t, so z(T) / z(0) = V(T)^{sigma^2 / (2 (sigma^2 - 1))}
  // (exp(T / 2) for sigma = 1).
  double worst_inv = 0.0, worst_fwd = 0.0;
  for (double sigma : {1.0, 0.5}) {
    const Schedule s = make_schedule(ScheduleKind::Linear, sigma);
    SamplerConfig cfg;
    cfg.n_steps = n_steps;
    const FieldFn zero = [s](const Matrix& zt, double t, std::span<const int>, bool need_score) {
      FieldValue f;
      f.h = Matrix::Zero(zt.rows(), zt.cols());
      if (need_score) f.score = score_from_drift(s, t, zt, f.h);
      return f;
    };
    Rng rng(seed);
    const Matrix z1 = rng.normal_matrix(n_samples, 2);
    const double T = 1.0 - cfg.t_clip;
    const double s2 = sigma * sigma;
    const double growth = s2 == 1.0 ? std::exp(T / 2.0) : std::pow(1.0 + (s2 - 1.0) * T, s2 / (2.0 * (s2 - 1.0)));
    const Matrix z0 = invert_latents(s, z1, cfg, zero);
    worst_inv = std::max(worst_inv, (z0 - z1 / growth).norm() / (z1 / growth).norm());
    const Matrix back = integrate(s, z0, cfg, zero).z1;
    worst_fwd = std::max(worst_fwd, (back - z1).norm() / z1.norm());
  }
  return verdict(worst_inv < 1e-3 && worst_fwd < 1e-2,
                 "inverse vs closed form " + fmt(worst_inv) + " (tol 1e-3), forward-after-invert " + fmt(worst_fwd) +
                     " (tol 1e-2)",
                 {{"inverse_error", worst_inv}, {"roundtrip_error", worst_fwd}});
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"schedules", "bridge", "objective", "gradients", "sampler", "all"};
  return names;
}

SuiteReport run_suite(const std::string& name) {
  if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
    throw std::invalid_argument("unknown suite '" + name + "'");
  SuiteReport rep;
  rep.suite = name;
  const bool all = name == "all";
  auto add = [&](const std::string& check, const std::function<CheckResult()>& fn) {
    rep.checks.push_back(run_check(check, fn));
  };
  if (all || name == "schedules") {
    add("schedule_algebra", [] { return check_schedule_algebra(1000, 1); });
  }
  if (all || name == "bridge") {
    add("bridge_oracle_linear", [] { return check_bridge_oracle(ScheduleKind::Linear, 4000, 1000, 2); });
    add("bridge_oracle_vp", [] { return check_bridge_oracle(ScheduleKind::VariancePreserving, 4000, 1000, 3); });
    add("interpolant_moments", [] { return check_interpolant_moments(50000, 4); });
  }
  if (all || name == "objective") {
    add("parameterizations", [] { return check_parameterizations(200, 5); });
    add("time_change", [] { return check_time_change({1.0, 2.0}, 200000, 6); });
    add("observation_space_reduction", [] { return check_objective_reduction(7); });
    add("stop_gradient", [] { return check_joint_stop_gradient(8); });
  }
  if (all || name == "gradients") {
    add("loss_gradient", [] { return check_gradients(20, 9); });
  }
  if (all || name == "sampler") {
    add("marginal_preservation", [] { return check_sampler_marginals({0.0, 0.5, 1.0}, 20000, 200, 10); });
    add("score_agreement", [] { return check_score_agreement(1000, 11); });
    add("cfg_identities", [] { return check_cfg_identities(64, 50, 12); });
    add("inversion_closed_form", [] { return check_inversion_closed_form(256, 500, 13); });
  }
  return rep;
}

}  // namespace lsi::app
