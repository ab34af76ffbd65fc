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


#include "lsi/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "lsi/rng.hpp"

namespace lsi {
namespace {

TEST(EnergyDistance, IdenticalSamplesGiveZero) {
  Rng rng(1);
  const Matrix a = rng.normal_matrix(300, 3);
  EXPECT_EQ(energy_distance(a, a), 0.0);
}

TEST(EnergyDistance, ExactlySymmetric) {
  Rng rng(2);
  const Matrix a = rng.normal_matrix(200, 2), b = rng.normal_matrix(150, 2).array() + 0.3;
  EXPECT_EQ(energy_distance(a, b), energy_distance(b, a));
  EXPECT_EQ(energy_distance(a, b, EnergyEstimator::UStatistic), energy_distance(b, a, EnergyEstimator::UStatistic));
}

TEST(EnergyDistance, LargeSeparationMatchesMonteCarlo) {
  Rng rng(3);
  const Matrix a = rng.normal_matrix(2000, 2);
  Matrix b = rng.normal_matrix(2000, 2);
  b.col(0).array() += 10.0;
  double cross = 0.0, within = 0.0;
  const int m = 400000;
  for (int i = 0; i < m; ++i) {
    const double dx = rng.normal() - rng.normal() - 10.0, dy = rng.normal() - rng.normal();
    cross += std::hypot(dx, dy);
    within += std::hypot(rng.normal() - rng.normal(), rng.normal() - rng.normal());
  }
  const double oracle = 2 * cross / m - 2 * within / m;
  EXPECT_NEAR(energy_distance(a, b, EnergyEstimator::UStatistic), oracle, 0.05 * oracle);
  EXPECT_NEAR(energy_distance(a, b), oracle, 0.05 * oracle);
}

TEST(EnergyDistance, NonNegativeOnSameDistribution) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const Matrix a = rng.normal_matrix(60, 2), b = rng.normal_matrix(60, 2);
    EXPECT_GE(energy_distance(a, b), 0.0);
    EXPECT_GE(energy_distance(a, b, EnergyEstimator::UStatistic), -1e-3 * 60);
  }
}

TEST(EnergyDistance, Errors) {
  EXPECT_THROW(energy_distance(Matrix(1, 2), Matrix::Zero(5, 2)), std::invalid_argument);
  EXPECT_THROW(energy_distance(Matrix::Zero(5, 2), Matrix::Zero(5, 3)), std::invalid_argument);
}

TEST(HistogramKl, IdenticalIsZero) {
  Rng rng(5);
  const Matrix a = rng.normal_matrix(1000, 2);
  EXPECT_NEAR(histogram_kl(a, a, 16, Eigen::Vector2d(-3, -3), Eigen::Vector2d(3, 3)), 0.0, 1e-12);
}

TEST(HistogramKl, DisjointIsLargeButFinite) {
  const Matrix a = Matrix::Constant(100, 1, -1.0), b = Matrix::Constant(100, 1, 1.0);
  const double kl = histogram_kl(a, b, 10, Eigen::VectorXd::Constant(1, -2), Eigen::VectorXd::Constant(1, 2));
  EXPECT_TRUE(std::isfinite(kl));
  EXPECT_GT(kl, 10.0);
}

TEST(HistogramKl, GaussianPairMatchesDiscretizedAnalytic) {
  Rng rng(6);
  const int n = 200000, bins = 40;
  const Matrix a = rng.normal_matrix(n, 1);
  const Matrix b = rng.normal_matrix(n, 1).array() + 0.5;
  const double lo = -5, hi = 5, w = (hi - lo) / bins;
  auto cdf = [](double x, double mu) { return 0.5 * std::erfc(-(x - mu) / std::sqrt(2.0)); };
  double analytic = 0.0;
  for (int i = 0; i < bins; ++i) {
    // Edge bins absorb the tails.
    const double l = i == 0 ? -INFINITY : lo + i * w, r = i == bins - 1 ? INFINITY : lo + (i + 1) * w;
    const double p = cdf(r, 0.0) - cdf(l, 0.0), q = cdf(r, 0.5) - cdf(l, 0.5);
    analytic += p * std::log(p / q);
  }
  const double kl = histogram_kl(a, b, bins, Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
  EXPECT_NEAR(kl, analytic, 0.1 * analytic);
}

TEST(HistogramKl, Errors) {
  const Matrix a = Matrix::Zero(4, 1);
  EXPECT_THROW(histogram_kl(a, a, 4, Eigen::VectorXd::Constant(1, 1), Eigen::VectorXd::Constant(1, 1)),
               std::invalid_argument);
  EXPECT_THROW(histogram_kl(Matrix::Zero(4, 4), Matrix::Zero(4, 4), 4, Eigen::VectorXd::Zero(4),
                            Eigen::VectorXd::Ones(4)),
               std::invalid_argument);
}

TEST(Psnr, Examples) {
  const Matrix x = Matrix::Constant(3, 2, 0.5);
  EXPECT_EQ(psnr(x, x, 2.0), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(psnr(x, x.array() + 2.0, 2.0), 0.0, 1e-12);
  EXPECT_NEAR(psnr(x, x.array() + 0.02, 2.0), 40.0, 1e-9);
  EXPECT_THROW(psnr(x, x, 0.0), std::invalid_argument);
  EXPECT_THROW(psnr(x, Matrix::Zero(2, 2), 1.0), std::invalid_argument);
}

TEST(MomentCheck, ExactGaussianIsWithinThreeSigma) {
  Rng rng(7);
  const Eigen::Vector2d mean(1, -1), var(0.5, 2);
  Matrix s = rng.normal_matrix(50000, 2);
  for (int j = 0; j < 2; ++j) s.col(j) = (s.col(j).array() * std::sqrt(var(j)) + mean(j)).matrix();
  const auto r = gaussian_moment_check(s, mean, var);
  EXPECT_LT(r.max_abs_z(), 3.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(MomentCheck, BiasedSamplesAreFlagged) {
  Rng rng(8);
  const Matrix s = rng.normal_matrix(50000, 2).array() + 0.05;
  EXPECT_GT(gaussian_moment_check(s, Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()).max_abs_z(), 3.0);
}

TEST(MomentCheck, DegenerateAndErrors) {
  const Matrix two = (Matrix(2, 1) << 0.0, 1.0).finished();
  EXPECT_TRUE(gaussian_moment_check(two, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)).degenerate);
  EXPECT_THROW(gaussian_moment_check(Matrix::Zero(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)),
               std::invalid_argument);
}

TEST(ModeOccupancy, Fractions) {
  Matrix centers(2, 2);
  centers << 0, 0, 5, 5;
  Matrix pts(4, 2);
  pts << 0.1, 0, 5, 5.5, 5, 5, 10, 10;
  const auto occ = mode_occupancy(pts, centers, 0.9);
  ASSERT_EQ(occ.size(), 2u);
  EXPECT_DOUBLE_EQ(occ[0], 0.25);
  EXPECT_DOUBLE_EQ(occ[1], 0.5);
}

TEST(MetricReport, JsonHandlesInfinity) {
  MetricReport r;
  r.energy_distance = 0.01;
  r.psnr_db = std::numeric_limits<double>::infinity();
  r.mode_occupancy = {0.5, 0.5};
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_DOUBLE_EQ(j["energy_distance"].get<double>(), 0.01);
  EXPECT_TRUE(j["psnr_db"].is_string());
  EXPECT_EQ(j["mode_occupancy"].size(), 2u);
}

}  // namespace
}  // namespace lsi
