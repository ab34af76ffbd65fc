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

// Sample-quality metrics and analytic moment checks.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace lsi {

using Matrix = Eigen::MatrixXd;

enum class EnergyEstimator {
  /// Includes the zero diagonal in the within-sample means; exactly 0 for A = B
  /// and biased upward by O(1/n).
  VStatistic,
  /// Unbiased; can dip slightly below zero.
  UStatistic,
};

/// 2 E|a-b| - E|a-a'| - E|b-b'| over rows. Symmetric in (A, B) bit for bit.
double energy_distance(const Matrix& a, const Matrix& b, EnergyEstimator est = EnergyEstimator::VStatistic);

/// KL(hist(A) || hist(B)) on a shared grid of `bins` per dimension over
/// [lo, hi] (d <= 3). Points outside the range fall into the edge bins.
double histogram_kl(const Matrix& a, const Matrix& b, int bins, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                    double smoothing = 1e-9);

/// 10 log10(range^2 / MSE); +infinity when MSE is exactly zero.
double psnr(const Matrix& x, const Matrix& x_hat, double data_range);

struct MomentCheck {
  Eigen::VectorXd mean_z;  // (sample mean - mean) / sqrt(var / n)
  Eigen::VectorXd var_z;   // (sample var - var) / (var sqrt(2 / (n - 1)))
  Eigen::VectorXd mean_error;
  Eigen::VectorXd var_rel_error;
  /// Too few samples for the normal approximation to mean anything.
  bool degenerate = false;
  double max_abs_z() const;
};

MomentCheck gaussian_moment_check(const Matrix& samples, const Eigen::VectorXd& mean, const Eigen::VectorXd& var_diag);

/// Fraction of rows within radius of each center (rows of `centers`).
std::vector<double> mode_occupancy(const Matrix& points, const Matrix& centers, double radius);

struct MetricReport {
  double energy_distance = 0.0;
  double histogram_kl = 0.0;
  double psnr_db = 0.0;
  std::vector<double> moment_errors;
  std::vector<double> mode_occupancy;
};

std::string to_json(const MetricReport& report);

}  // namespace lsi
