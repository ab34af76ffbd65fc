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

#include "lsi/schedules.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lsi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit_interval(double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("time " + std::to_string(t) + " outside [0, 1]");
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::VariancePreserving: return "variance_preserving";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "linear") return ScheduleKind::Linear;
  if (name == "variance_preserving" || name == "vp") return ScheduleKind::VariancePreserving;
  throw std::invalid_argument("unknown schedule kind '" + std::string(name) + "'");
}

Schedule make_schedule(ScheduleKind kind, double sigma) {
  Schedule s;
  s.kind = kind;
  switch (kind) {
    case ScheduleKind::Linear:
      if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("linear schedule needs a finite sigma > 0");
      s.sigma = sigma;
      s.a01 = 2.0;
      s.b01 = 2.0 * sigma * sigma;
      break;
    case ScheduleKind::VariancePreserving:
      s.sigma = 1.0;
      s.a01 = 1.0;
      s.b01 = 2.0;
      break;
  }
  return s;
}

Coefficients coefficients(const Schedule& s, double t) {
  check_unit_interval(t);
  Coefficients c;
  switch (s.kind) {
    case ScheduleKind::Linear: {
      c.kappa = t;
      c.nu = 1.0 - t;
      c.eta = s.sigma * std::sqrt(t * (1.0 - t));
      c.dkappa = 1.0;
      c.dnu = -1.0;
      if (t == 0.0) {
        c.deta = kInf;
      } else if (t == 1.0) {
        c.deta = -kInf;
      } else {
        c.deta = s.sigma * (1.0 - 2.0 * t) / (2.0 * std::sqrt(t * (1.0 - t)));
      }
      break;
    }
    case ScheduleKind::VariancePreserving: {
      const double r = std::sqrt(t);
      const double ratio = s.b01 / s.a01;
      c.kappa = r;
      c.nu = 1.0 - r;
      c.eta = std::sqrt(ratio * r * (1.0 - r));
      if (t == 0.0) {
        c.dkappa = kInf;
        c.dnu = -kInf;
        c.deta = kInf;
      } else {
        c.dkappa = 0.5 / r;
        c.dnu = -0.5 / r;
        // eta^2 = ratio (sqrt t - t)
        c.deta = t == 1.0 ? -kInf : ratio * (0.5 / r - 1.0) / (2.0 * c.eta);
      }
      break;
    }
  }
  return c;
}

SdeCoefficients sde_coefficients(const Schedule& s, double t) {
  if (!(t >= 0.0 && t < 1.0))
    throw std::domain_error("sde coefficients need t in [0, 1), got " + std::to_string(t));
  switch (s.kind) {
    case ScheduleKind::Linear:
      return {1.0 / (1.0 + t), s.sigma};
    case ScheduleKind::VariancePreserving:
      if (t == 0.0) throw std::domain_error("variance preserving sigma_t diverges at t = 0");
      return {0.0, std::sqrt(1.0 / std::sqrt(t))};
  }
  return {};
}

ConvertedCoefficients coeffs_from_kappa_nu(const ScalarFn& kappa, const ScalarFn& nu,
                                           const ScalarFn& dkappa, const ScalarFn& dnu,
                                           double a01, double b01, double t) {
  const double k = kappa(t);
  const double n = nu(t);
  const double dk = dkappa(t);
  const double dn = dnu(t);
  if (!std::isfinite(k) || !std::isfinite(n) || !std::isfinite(dk) || !std::isfinite(dn))
    throw std::domain_error("non-finite schedule input at t = " + std::to_string(t));
  const double denom = a01 * k + n;
  if (denom == 0.0) throw std::domain_error("a01 * kappa + nu vanishes at t = " + std::to_string(t));

  ConvertedCoefficients out;
  out.h = (a01 * dk + dn) / denom;
  out.sigma_sq = (b01 / a01) * (n * dk - k * dn);
  if (out.sigma_sq < 0.0) throw std::domain_error("negative squared dispersion at t = " + std::to_string(t));
  out.eta = std::sqrt((b01 / a01) * k * n);
  return out;
}

}  // namespace lsi
