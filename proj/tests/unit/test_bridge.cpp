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

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

namespace lsi {
namespace {

const Schedule kLinear = make_schedule(ScheduleKind::Linear, 1.0);
const Schedule kVp = make_schedule(ScheduleKind::VariancePreserving);

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

TEST(Transition, LinearFullInterval) {
  const auto k = transition(kLinear, 0.0, 1.0);
  EXPECT_NEAR(k.a_st, 2.0, 1e-15);
  EXPECT_NEAR(k.b_st, 2.0, 1e-15);
}

TEST(Transition, EmptyInterval) {
  for (const auto& s : {kLinear, kVp}) {
    const auto k = transition(s, 0.4, 0.4);
    EXPECT_EQ(k.a_st, 1.0);
    EXPECT_EQ(k.b_st, 0.0);
  }
}

TEST(Transition, VpQuarterToOne) {
  const auto k = transition(kVp, 0.25, 1.0);
  EXPECT_EQ(k.a_st, 1.0);
  EXPECT_NEAR(k.b_st, 1.0, 1e-15);
}

TEST(Transition, LinearClosedForm) {
  const Schedule s = make_schedule(ScheduleKind::Linear, 1.5);
  const auto k = transition(s, 0.2, 0.7);
  EXPECT_NEAR(k.a_st, 1.7 / 1.2, 1e-14);
  EXPECT_NEAR(k.b_st, 2.25 * 1.7 * 0.5 / 1.2, 1e-14);
}

TEST(Transition, RejectsReversedTimes) { EXPECT_THROW(transition(kLinear, 0.6, 0.5), std::domain_error); }

TEST(Transition, CompositionIdentities) {
  Rng rng(5);
  for (const auto& s : {make_schedule(ScheduleKind::Linear, 0.7), kVp}) {
    for (int i = 0; i < 1000; ++i) {
      const double t = rng.uniform();
      const auto k0t = transition(s, 0.0, t);
      const auto kt1 = transition(s, t, 1.0);
      EXPECT_NEAR(k0t.a_st * kt1.a_st, s.a01, 1e-10);
      EXPECT_NEAR(kt1.a_st * kt1.a_st * k0t.b_st + kt1.b_st, s.b01, 1e-10);
    }
  }
}

TEST(BridgeDensity, LinearMidpointAtOrigin) {
  const auto d = bridge_density(kLinear, 0.5, v({0.0}), v({0.0}));
  EXPECT_NEAR(d.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(d.var, 0.25, 1e-14);
}

TEST(BridgeDensity, EqualEndpoints) {
  const Vec x = v({1.5, -2.0});
  const auto d = bridge_density(kLinear, 0.5, x, x);
  EXPECT_NEAR((d.mean - x).norm(), 0.0, 1e-14);
}

TEST(BridgeDensity, VpQuarter) {
  const auto d = bridge_density(kVp, 0.25, v({1.0}), v({3.0}));
  EXPECT_NEAR(d.mean(0), 2.0, 1e-14);
  EXPECT_NEAR(d.var, 0.5, 1e-14);
}

TEST(BridgeDensity, MatchesInterpolantCoefficients) {
  Rng rng(6);
  const Vec z0 = v({0.3, -1.2}), z1 = v({2.0, 0.5});
  for (const auto& s : {make_schedule(ScheduleKind::Linear, 1.3), kVp}) {
    for (int i = 0; i < 1000; ++i) {
      const double t = 0.001 + 0.998 * rng.uniform();
      const auto d = bridge_density(s, t, z0, z1);
      const auto c = coefficients(s, t);
      EXPECT_LT((d.mean - (c.kappa * z1 + c.nu * z0)).norm(), 1e-10);
      EXPECT_NEAR(d.var, c.eta * c.eta, 1e-10);
    }
  }
}

TEST(BridgeDensity, RejectsEndpoints) {
  EXPECT_THROW(bridge_density(kLinear, 0.0, v({0}), v({0})), std::domain_error);
  EXPECT_THROW(bridge_density(kLinear, 1.0, v({0}), v({0})), std::domain_error);
}

TEST(SampleInterpolant, EndpointsExact) {
  Rng rng(1);
  const Vec z0 = v({0.1, 0.2}), z1 = v({-3.0, 4.0});
  const auto a = sample_interpolant(kLinear, 0.0, z0, z1, rng);
  EXPECT_EQ(a.zt, z0);
  EXPECT_EQ(a.eps.size(), 2);
  const auto b = sample_interpolant(kLinear, 1.0, z0, z1, rng);
  EXPECT_EQ(b.zt, z1);
}

TEST(SampleInterpolant, KnownNoise) {
  const Vec zt = interpolant_with_noise(kLinear, 0.5, v({0, 0}), v({0, 0}), v({1, -1}));
  EXPECT_NEAR(zt(0), 0.5, 1e-15);
  EXPECT_NEAR(zt(1), -0.5, 1e-15);
}

TEST(SampleInterpolant, ConstructionIdentity) {
  Rng rng(9);
  const Vec z0 = v({1.0, 2.0}), z1 = v({-1.0, 0.5});
  const auto smp = sample_interpolant(kLinear, 0.3, z0, z1, rng);
  const auto c = coefficients(kLinear, 0.3);
  EXPECT_EQ(smp.zt, (c.eta * smp.eps + c.kappa * z1 + c.nu * z0).eval());
}

TEST(SampleInterpolant, DimensionMismatch) {
  Rng rng(1);
  EXPECT_THROW(sample_interpolant(kLinear, 0.5, v({0}), v({0, 1}), rng), std::invalid_argument);
}

TEST(SampleInterpolant, MomentsMatchBridgeDensity) {
  Rng rng(10);
  const Vec z0 = v({0.5, -1.0}), z1 = v({2.0, 1.0});
  const double t = 0.4;
  const int n = 50000;
  Vec sum = Vec::Zero(2), sum2 = Vec::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vec zt = sample_interpolant(kLinear, t, z0, z1, rng).zt;
    sum += zt;
    sum2 += zt.cwiseProduct(zt);
  }
  const auto d = bridge_density(kLinear, t, z0, z1);
  const Vec mean = sum / n;
  const Vec var = sum2 / n - mean.cwiseProduct(mean);
  for (int k = 0; k < 2; ++k) {
    EXPECT_LT(std::abs(mean(k) - d.mean(k)), 3 * std::sqrt(d.var / n));
    EXPECT_LT(std::abs(var(k) - d.var), 3 * d.var * std::sqrt(2.0 / (n - 1)));
  }
}

TEST(GradLogEnd, ZeroResidual) {
  const double t = 0.3;
  const auto k = transition(kLinear, t, 1.0);
  const Vec zt = v({0.7, -0.2});
  EXPECT_LT(grad_log_end(kLinear, t, zt, k.a_st * zt).norm(), 1e-15);
}

TEST(GradLogEnd, AtTimeZero) { EXPECT_NEAR(grad_log_end(kLinear, 0.0, v({0}), v({2}))(0), 2.0, 1e-15); }

TEST(GradLogEnd, Linear) {
  const Vec zt = v({0.1});
  const auto k = transition(kLinear, 0.2, 1.0);
  const Vec z1a = k.a_st * zt + v({0.5});
  const Vec z1b = k.a_st * zt + v({1.0});
  EXPECT_NEAR(grad_log_end(kLinear, 0.2, zt, z1b)(0), 2 * grad_log_end(kLinear, 0.2, zt, z1a)(0), 1e-13);
}

TEST(GradLogEnd, SingularAtOne) { EXPECT_THROW(grad_log_end(kLinear, 1.0, v({0}), v({0})), std::domain_error); }

TEST(DoobDrift, Examples) {
  EXPECT_NEAR(doob_drift(kLinear, 0.0, v({0}), v({2}))(0), 2.0, 1e-15);
  const double t = 0.35;
  const Vec zt = v({1.1, -0.4});
  const Vec z1 = transition(kLinear, t, 1.0).a_st * zt;
  EXPECT_LT((doob_drift(kLinear, t, zt, z1) - sde_coefficients(kLinear, t).h * zt).norm(), 1e-14);
}

TEST(SimulateBridge, EndpointPinnedAndLength) {
  Rng rng(3);
  const auto path = simulate_bridge(kLinear, v({0.5, -1}), v({2, 1}), 100, rng);
  ASSERT_EQ(path.size(), 101u);
  EXPECT_EQ(path.front(), v({0.5, -1}));
  EXPECT_EQ(path.back(), v({2, 1}));
}

TEST(SimulateBridge, RejectsTooFewSteps) {
  Rng rng(3);
  EXPECT_THROW(simulate_bridge(kLinear, v({0}), v({0}), 1, rng), std::invalid_argument);
}

TEST(SimulateBridge, SmallSigmaStaysNearZero) {
  Rng rng(4);
  const Schedule s = make_schedule(ScheduleKind::Linear, 1e-8);
  for (const auto& z : simulate_bridge(s, v({0, 0}), v({0, 0}), 200, rng)) EXPECT_LT(z.norm(), 1e-6);
}

TEST(SimulateBridge, MidpointMomentsWithinThreeStandardErrors) {
  Rng rng(12);
  const Vec z0 = v({0.5, -1}), z1 = v({2, 1});
  const int n = 4000, steps = 400;
  Vec sum = Vec::Zero(2), sum2 = Vec::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vec z = simulate_bridge(kLinear, z0, z1, steps, rng)[steps / 2];
    sum += z;
    sum2 += z.cwiseProduct(z);
  }
  const auto d = bridge_density(kLinear, 0.5, z0, z1);
  const Vec mean = sum / n;
  const Vec var = sum2 / n - mean.cwiseProduct(mean);
  for (int k = 0; k < 2; ++k) {
    EXPECT_LT(std::abs(mean(k) - d.mean(k)), 3 * std::sqrt(d.var / n));
    EXPECT_LT(std::abs(var(k) - d.var), 3 * d.var * std::sqrt(2.0 / (n - 1)));
  }
}

}  // namespace
}  // namespace lsi
