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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace lsi {
namespace {

double mean_pairwise(const Matrix& a, const Matrix& b, bool same, bool unbiased) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j0 = same ? i + 1 : 0;
    long double row = 0.0L;
    for (Eigen::Index j = j0; j < m; ++j) row += (a.row(i) - b.row(j)).norm();
    acc += row;
  }
  if (same) {
    acc *= 2.0L;
    const long double denom = unbiased ? static_cast<long double>(n) * (n - 1) : static_cast<long double>(n) * n;
    return static_cast<double>(acc / denom);
  }
  return static_cast<double>(acc / (static_cast<long double>(n) * m));
}

// Canonical order so that swapping the arguments replays identical arithmetic.
bool ordered_before(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

double energy_distance(const Matrix& a, const Matrix& b, EnergyEstimator est) {
  if (a.rows() < 2 || b.rows() < 2) throw std::invalid_argument("energy_distance needs at least 2 samples per batch");
  if (a.cols() != b.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
  const Matrix& p = ordered_before(b, a) ? b : a;
  const Matrix& q = &p == &a ? b : a;
  const bool unbiased = est == EnergyEstimator::UStatistic;
  return 2.0 * mean_pairwise(p, q, false, unbiased) - mean_pairwise(p, p, true, unbiased) -
         mean_pairwise(q, q, true, unbiased);
}

double histogram_kl(const Matrix& a, const Matrix& b, int bins, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                    double smoothing) {
  const Eigen::Index d = a.cols();
  if (d < 1 || d > 3) throw std::invalid_argument("histogram_kl supports 1 to 3 dimensions");
  if (b.cols() != d || lo.size() != d || hi.size() != d) throw std::invalid_argument("histogram_kl: dimension mismatch");
  if (bins < 1) throw std::invalid_argument("histogram_kl needs bins >= 1");
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("histogram_kl: empty batch");
  for (Eigen::Index k = 0; k < d; ++k)
    if (!(hi(k) > lo(k))) throw std::invalid_argument("histogram_kl: zero-width range");

  std::size_t cells = 1;
  for (Eigen::Index k = 0; k < d; ++k) cells *= static_cast<std::size_t>(bins);
  auto histogram = [&](const Matrix& x) {
    std::vector<double> h(cells, 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::size_t idx = 0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double u = (x(i, k) - lo(k)) / (hi(k) - lo(k));
        const int bin = std::clamp(static_cast<int>(std::floor(u * bins)), 0, bins - 1);
        idx = idx * static_cast<std::size_t>(bins) + static_cast<std::size_t>(bin);
      }
      h[idx] += 1.0;
    }
    const double total = static_cast<double>(x.rows()) + smoothing * static_cast<double>(cells);
    for (double& v : h) v = (v + smoothing) / total;
    return h;
  };
  const std::vector<double> p = histogram(a);
  const std::vector<double> q = histogram(b);
  double kl = 0.0;
  for (std::size_t i = 0; i < cells; ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

double psnr(const Matrix& x, const Matrix& x_hat, double data_range) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) throw std::invalid_argument("psnr: shape mismatch");
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be positive");
  if (x.size() == 0) throw std::invalid_argument("psnr: empty input");
  const double mse = (x - x_hat).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double MomentCheck::max_abs_z() const {
  double m = 0.0;
  if (mean_z.size()) m = std::max(m, mean_z.cwiseAbs().maxCoeff());
  if (var_z.size()) m = std::max(m, var_z.cwiseAbs().maxCoeff());
  return m;
}

MomentCheck gaussian_moment_check(const Matrix& samples, const Eigen::VectorXd& mean, const Eigen::VectorXd& var_diag) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2) throw std::invalid_argument("gaussian_moment_check needs at least 2 samples");
  if (mean.size() != d || var_diag.size() != d) throw std::invalid_argument("gaussian_moment_check: dimension mismatch");
  if ((var_diag.array() <= 0.0).any()) throw std::invalid_argument("gaussian_moment_check: variances must be positive");
  MomentCheck out;
  const double nn = static_cast<double>(n);
  const Eigen::VectorXd m = samples.colwise().mean().transpose();
  const Eigen::VectorXd v = (samples.rowwise() - m.transpose()).colwise().squaredNorm().transpose() / (nn - 1.0);
  out.mean_error = m - mean;
  out.var_rel_error = (v - var_diag).cwiseQuotient(var_diag);
  out.mean_z = out.mean_error.cwiseQuotient((var_diag / nn).cwiseSqrt());
  out.var_z = out.var_rel_error / std::sqrt(2.0 / (nn - 1.0));
  out.degenerate = n < 30;
  return out;
}

std::vector<double> mode_occupancy(const Matrix& points, const Matrix& centers, double radius) {
  if (points.cols() != centers.cols()) throw std::invalid_argument("mode_occupancy: dimension mismatch");
  std::vector<double> frac(static_cast<std::size_t>(centers.rows()), 0.0);
  if (points.rows() == 0) return frac;
  for (Eigen::Index k = 0; k < centers.rows(); ++k) {
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      if ((points.row(i) - centers.row(k)).norm() <= radius) ++hits;
    frac[static_cast<std::size_t>(k)] = static_cast<double>(hits) / static_cast<double>(points.rows());
  }
  return frac;
}

std::string to_json(const MetricReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  };
  nlohmann::json j;
  j["energy_distance"] = num(r.energy_distance);
  j["histogram_kl"] = num(r.histogram_kl);
  j["psnr_db"] = num(r.psnr_db);
  j["moment_errors"] = r.moment_errors;
  j["mode_occupancy"] = r.mode_occupancy;
  return j.dump(2);
}

}  // namespace lsi
