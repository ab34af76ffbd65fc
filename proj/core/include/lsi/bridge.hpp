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

// Gaussian transition kernels of the linear SDE dz = h_t z dt + sigma_t dW and
// the end-point conditioned bridge built from them.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lsi/rng.hpp"
#include "lsi/schedules.hpp"

namespace lsi {

using Vec = Eigen::VectorXd;

/// p(z_t | z_s) = N(a_st z_s, b_st I).
struct TransitionKernel {
  double a_st = 1.0;
  double b_st = 0.0;
};

struct GaussianDensity {
  Vec mean;
  double var = 0.0;  // isotropic
};

/// One realization of z_t = eta_t eps + kappa_t z1 + nu_t z0.
struct InterpolantSample {
  double t = 0.0;
  Vec z0;
  Vec z1;
  Vec eps;
  Vec zt;
};

/// Closed-form kernel between times s <= t.
TransitionKernel transition(const Schedule& s, double s_time, double t_time);

/// p(z_t | z_0, z_1) for 0 < t < 1.
GaussianDensity bridge_density(const Schedule& s, double t, const Vec& z0, const Vec& z1);

/// Draws eps from rng and builds z_t. At t in {0, 1} the endpoint is returned
/// exactly (eps is still drawn and recorded).
InterpolantSample sample_interpolant(const Schedule& s, double t, const Vec& z0, const Vec& z1, Rng& rng);

/// Same construction with a caller-supplied eps.
Vec interpolant_with_noise(const Schedule& s, double t, const Vec& z0, const Vec& z1, const Vec& eps);

/// grad_{z_t} ln p(z_1 | z_t) = a_t1 (z1 - a_t1 z_t) / b_t1, t < 1.
Vec grad_log_end(const Schedule& s, double t, const Vec& zt, const Vec& z1);

/// Doob h-transformed drift h_t z_t + sigma_t^2 grad_log_end.
Vec doob_drift(const Schedule& s, double t, const Vec& zt, const Vec& z1);

/// Euler-Maruyama simulation of the bridge SDE on a uniform grid of n_steps
/// intervals. Coefficients are evaluated at interval midpoints; the final
/// state is pinned to z1. Returns n_steps + 1 states.
std::vector<Vec> simulate_bridge(const Schedule& s, const Vec& z0, const Vec& z1, int n_steps, Rng& rng);

}  // namespace lsi
