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

// Interpolant and SDE coefficient algebra.
//
// An interpolant z_t = eta_t * eps + kappa_t * z1 + nu_t * z0 is paired with the
// linear SDE dz = h_t z dt + sigma_t dW whose end-point conditioned bridge it
// samples. Two closed-form schedules are provided:
//
//   Linear(sigma):      kappa = t,     nu = 1 - t,     eta = sigma sqrt(t(1-t))
//                       h = 1/(1+t),   sigma_t = sigma, a01 = 2, b01 = 2 sigma^2
//   VariancePreserving: kappa = sqrt t, nu = 1 - sqrt t, eta^2 = 2 sqrt t (1 - sqrt t)
//                       h = 0,         sigma_t^2 = 1/sqrt t, a01 = 1, b01 = 2
//
// All scalar math is double precision.

#pragma once

#include <functional>
#include <string_view>

namespace lsi {

enum class ScheduleKind { Linear, VariancePreserving };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

struct Schedule {
  ScheduleKind kind = ScheduleKind::Linear;
  double sigma = 1.0;  // dispersion, Linear only
  double a01 = 2.0;
  double b01 = 2.0;
};

/// Throws std::invalid_argument for a non-positive or NaN sigma on Linear.
Schedule make_schedule(ScheduleKind kind, double sigma = 1.0);

struct Coefficients {
  double kappa = 0.0;
  double nu = 0.0;
  double eta = 0.0;
  double dkappa = 0.0;
  double dnu = 0.0;
  /// d(eta)/dt. Signed infinity at the endpoints where eta has a square-root
  /// cusp; callers that need finite values must keep t away from {0, 1}.
  double deta = 0.0;
};

/// Throws std::domain_error for t outside [0, 1].
Coefficients coefficients(const Schedule& s, double t);

struct SdeCoefficients {
  double h = 0.0;
  double sigma_t = 0.0;
};

/// Requires t < 1, and t > 0 for VariancePreserving (sigma_t diverges at 0).
SdeCoefficients sde_coefficients(const Schedule& s, double t);

struct ConvertedCoefficients {
  double h = 0.0;
  double sigma_sq = 0.0;
  double eta = 0.0;
};

using ScalarFn = std::function<double(double)>;

/// Generic conversion from (kappa, nu) and the bridge constants a01, b01 to the
/// SDE drift coefficient, squared dispersion and interpolant noise scale.
ConvertedCoefficients coeffs_from_kappa_nu(const ScalarFn& kappa, const ScalarFn& nu,
                                           const ScalarFn& dkappa, const ScalarFn& dnu,
                                           double a01, double b01, double t);

}  // namespace lsi
