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

#include "lsi/bridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsi {
namespace {

void check_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
}

}  // namespace

TransitionKernel transition(const Schedule& s, double s_time, double t_time) {
  if (!(s_time >= 0.0 && t_time <= 1.0))
    throw std::domain_error("transition times must lie in [0, 1]");
  if (s_time > t_time) throw std::domain_error("transition needs s <= t");
  switch (s.kind) {
    case ScheduleKind::Linear: {
      // a_st = exp(int_s^t 1/(1+v) dv), b_st = int_s^t sigma^2 a_vt^2 dv
      const double a = (1.0 + t_time) / (1.0 + s_time);
      const double b = s.sigma * s.sigma * (1.0 + t_time) * (t_time - s_time) / (1.0 + s_time);
      return {a, b};
    }
    case ScheduleKind::VariancePreserving:
      return {1.0, 2.0 * (std::sqrt(t_time) - std::sqrt(s_time))};
  }
  return {};
}

GaussianDensity bridge_density(const Schedule& s, double t, const Vec& z0, const Vec& z1) {
  check_same_dim(z0, z1, "bridge_density");
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("bridge_density needs 0 < t < 1");
  const TransitionKernel k0t = transition(s, 0.0, t);
  const TransitionKernel kt1 = transition(s, t, 1.0);
  const TransitionKernel k01 = transition(s, 0.0, 1.0);
  GaussianDensity g;
  g.mean = (k0t.b_st * kt1.a_st * z1 + kt1.b_st * k0t.a_st * z0) / k01.b_st;
  g.var = k0t.b_st * kt1.b_st / k01.b_st;
  return g;
}

Vec interpolant_with_noise(const Schedule& s, double t, const Vec& z0, const Vec& z1, const Vec& eps) {
  check_same_dim(z0, z1, "interpolant");
  check_same_dim(z0, eps, "interpolant");
  if (t == 0.0) return z0;
  if (t == 1.0) return z1;
  const Coefficients c = coefficients(s, t);
  return c.eta * eps + c.kappa * z1 + c.nu * z0;
}

InterpolantSample sample_interpolant(const Schedule& s, double t, const Vec& z0, const Vec& z1, Rng& rng) {
  check_same_dim(z0, z1, "sample_interpolant");
  InterpolantSample out;
  out.t = t;
  out.z0 = z0;
  out.z1 = z1;
  out.eps = rng.normal_vector(z0.size());
  out.zt = interpolant_with_noise(s, t, z0, z1, out.eps);
  return out;
}

Vec grad_log_end(const Schedule& s, double t, const Vec& zt, const Vec& z1) {
  check_same_dim(zt, z1, "grad_log_end");
  if (!(t < 1.0)) throw std::domain_error("grad_log_end is singular at t = 1");
  const TransitionKernel k = transition(s, t, 1.0);
  return k.a_st * (z1 - k.a_st * zt) / k.b_st;
}

Vec doob_drift(const Schedule& s, double t, const Vec& zt, const Vec& z1) {
  const SdeCoefficients sde = sde_coefficients(s, t);
  return sde.h * zt + sde.sigma_t * sde.sigma_t * grad_log_end(s, t, zt, z1);
}

std::vector<Vec> simulate_bridge(const Schedule& s, const Vec& z0, const Vec& z1, int n_steps, Rng& rng) {
  check_same_dim(z0, z1, "simulate_bridge");
  if (n_steps < 2) throw std::invalid_argument("simulate_bridge needs n_steps >= 2");
  const double dt = 1.0 / n_steps;
  const double sqrt_dt = std::sqrt(dt);
  std::vector<Vec> path;
  path.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.push_back(z0);
  Vec z = z0;
  for (int k = 0; k + 1 < n_steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    const SdeCoefficients sde = sde_coefficients(s, t_mid);
    const Vec drift = doob_drift(s, t_mid, z, z1);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += drift(i) * dt + sde.sigma_t * sqrt_dt * rng.normal();
    if (!z.allFinite())
      throw std::runtime_error("bridge simulation diverged at step " + std::to_string(k));
    path.push_back(z);
  }
  path.push_back(z1);
  return path;
}

}  // namespace lsi
