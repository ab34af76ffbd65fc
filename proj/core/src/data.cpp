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

#include "lsi/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

namespace lsi {
namespace {

constexpr double kPi = std::numbers::pi;

Matrix ring_centers() {
  Matrix c(8, 2);
  for (int k = 0; k < 8; ++k) {
    c(k, 0) = 4.0 * std::cos(2.0 * kPi * k / 8.0);
    c(k, 1) = 4.0 * std::sin(2.0 * kPi * k / 8.0);
  }
  return c;
}

// Black squares of a 4x4 board on [-4, 4]^2, lower-left corners.
Matrix checker_cells() {
  Matrix c(8, 2);
  int k = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if ((i + j) % 2 == 0) {
        c(k, 0) = -4.0 + 2.0 * i;
        c(k, 1) = -4.0 + 2.0 * j;
        ++k;
      }
  return c;
}

}  // namespace

std::string_view to_string(DatasetName name) {
  switch (name) {
    case DatasetName::GaussianRing8: return "gaussian_ring8";
    case DatasetName::Checkerboard: return "checkerboard";
    case DatasetName::TwoMoons: return "two_moons";
    case DatasetName::Spirals: return "spirals";
    case DatasetName::DiagonalGaussian: return "diagonal_gaussian";
  }
  return "unknown";
}

DatasetName dataset_name_from_string(std::string_view name) {
  for (auto n : {DatasetName::GaussianRing8, DatasetName::Checkerboard, DatasetName::TwoMoons, DatasetName::Spirals,
                 DatasetName::DiagonalGaussian})
    if (to_string(n) == name) return n;
  throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
}

int num_classes(DatasetName name) {
  switch (name) {
    case DatasetName::GaussianRing8: return 8;
    case DatasetName::Checkerboard: return 8;
    case DatasetName::TwoMoons: return 2;
    case DatasetName::Spirals: return 2;
    case DatasetName::DiagonalGaussian: return 1;
  }
  return 1;
}

int observation_dim(const DatasetSpec& spec) { return spec.lift_dim > 0 ? spec.lift_dim : 2; }

Matrix lift_matrix(int dim, std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("lift dimension must be at least 2");
  Rng rng(seed, 0x11F7);
  const Matrix g = rng.normal_matrix(dim, 2);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, 2);
  return q;
}

Dataset make_dataset(const DatasetSpec& spec, Rng& rng) {
  if (spec.n <= 0) throw std::invalid_argument("dataset size must be positive");
  if (spec.lift_dim != 0 && spec.lift_dim < 2) throw std::invalid_argument("lift_dim must be 0 or >= 2");
  Dataset ds;
  ds.num_classes = num_classes(spec.name);
  const Eigen::Index n = spec.n;
  ds.x2d.resize(n, 2);
  ds.labels.resize(static_cast<std::size_t>(n));

  // Round-robin labels keep every class within one sample of n / K.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i % ds.num_classes);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  switch (spec.name) {
    case DatasetName::GaussianRing8: {
      ds.centers = ring_centers();
      ds.mode_std = 0.3;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int k = order[static_cast<std::size_t>(i)];
        ds.x2d(i, 0) = ds.centers(k, 0) + 0.3 * rng.normal();
        ds.x2d(i, 1) = ds.centers(k, 1) + 0.3 * rng.normal();
      }
      break;
    }
    case DatasetName::Checkerboard: {
      const Matrix cells = checker_cells();
      ds.centers = cells.array() + 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int k = order[static_cast<std::size_t>(i)];
        ds.x2d(i, 0) = cells(k, 0) + 2.0 * rng.uniform();
        ds.x2d(i, 1) = cells(k, 1) + 2.0 * rng.uniform();
      }
      break;
    }
    case DatasetName::TwoMoons: {
      ds.centers = Matrix(2, 2);
      ds.centers << -1.0, 0.5, 1.0, -0.5;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int k = order[static_cast<std::size_t>(i)];
        const double th = kPi * rng.uniform();
        double px = k == 0 ? std::cos(th) : 1.0 - std::cos(th);
        double py = k == 0 ? std::sin(th) : 0.5 - std::sin(th);
        ds.x2d(i, 0) = 2.0 * (px - 0.5) + 0.1 * rng.normal();
        ds.x2d(i, 1) = 2.0 * (py - 0.25) + 0.1 * rng.normal();
      }
      break;
    }
    case DatasetName::Spirals: {
      ds.centers = Matrix::Zero(2, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        const int k = order[static_cast<std::size_t>(i)];
        const double u = std::sqrt(rng.uniform());
        const double th = 3.0 * kPi * u + kPi * k;
        const double r = 4.0 * u;
        ds.x2d(i, 0) = r * std::cos(th) + 0.1 * rng.normal();
        ds.x2d(i, 1) = r * std::sin(th) + 0.1 * rng.normal();
      }
      break;
    }
    case DatasetName::DiagonalGaussian: {
      if ((spec.var.array() <= 0.0).any()) throw std::invalid_argument("diagonal gaussian variances must be positive");
      ds.centers = spec.mean.transpose();
      for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) ds.x2d(i, j) = spec.mean(j) + std::sqrt(spec.var(j)) * rng.normal();
      break;
    }
  }
  ds.labels = std::move(order);

  if (spec.lift_dim > 0) {
    ds.lift = lift_matrix(spec.lift_dim, spec.lift_seed);
    ds.x = ds.x2d * ds.lift.transpose();
  } else {
    ds.x = ds.x2d;
  }
  return ds;
}

void write_csv(std::ostream& out, const Matrix& x, const std::vector<int>* labels) {
  if (labels && static_cast<Eigen::Index>(labels->size()) != x.rows())
    throw std::invalid_argument("label count differs from sample count");
  for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << 'x' << j;
  if (labels) out << (x.cols() ? "," : "") << "label";
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", x(i, j));
      out << (j ? "," : "") << buf;
    }
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

Matrix read_csv(std::istream& in, std::vector<int>* labels) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool has_label = !header.empty() && header.back() == "label";
  const std::size_t dims = header.size() - (has_label ? 1 : 0);
  std::vector<double> values;
  std::vector<int> labs;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col < dims) {
          values.push_back(std::stod(cell));
        } else if (has_label && col == dims) {
          labs.push_back(std::stoi(cell));
        }
      } catch (const std::exception&) {
        throw std::runtime_error("malformed CSV cell '" + cell + "' on data row " + std::to_string(rows + 1));
      }
      ++col;
    }
    if (col != header.size()) throw std::runtime_error("CSV row " + std::to_string(rows + 1) + " has the wrong width");
    ++rows;
  }
  Matrix x(rows, static_cast<Eigen::Index>(dims));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = values[static_cast<std::size_t>(i * x.cols() + j)];
  if (labels) *labels = has_label ? labs : std::vector<int>{};
  return x;
}

// ---- priors ----------------------------------------------------------------

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::StandardNormal: return "standard_normal";
    case PriorKind::Uniform: return "uniform";
    case PriorKind::Laplace: return "laplace";
    case PriorKind::GaussianMixture: return "gaussian_mixture";
    case PriorKind::DataCoupledMixture: return "data_coupled_mixture";
    case PriorKind::LearnableGaussian: return "learnable_gaussian";
  }
  return "unknown";
}

PriorKind prior_kind_from_string(std::string_view name) {
  for (auto k : {PriorKind::StandardNormal, PriorKind::Uniform, PriorKind::Laplace, PriorKind::GaussianMixture,
                 PriorKind::DataCoupledMixture, PriorKind::LearnableGaussian})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown prior '" + std::string(name) + "'");
}

bool is_standard_normal(const PriorSpec& spec) { return spec.kind == PriorKind::StandardNormal; }

Matrix prior_sample(const PriorSpec& spec, Eigen::Index n, Eigen::Index d, Rng& rng, const PriorContext& ctx) {
  Matrix z(n, d);
  switch (spec.kind) {
    case PriorKind::StandardNormal:
      return rng.normal_matrix(n, d);
    case PriorKind::Uniform: {
      const double half = std::sqrt(3.0);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = half * (2.0 * rng.uniform() - 1.0);
      return z;
    }
    case PriorKind::Laplace: {
      const double b = 1.0 / std::sqrt(2.0);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
          const double u = rng.uniform() - 0.5;
          z(i, j) = -b * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
        }
      return z;
    }
    case PriorKind::GaussianMixture: {
      Matrix means = spec.mixture_means;
      if (means.size() == 0) {
        means = Matrix::Zero(2 * d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
          means(2 * j, j) = 0.8;
          means(2 * j + 1, j) = -0.8;
        }
      }
      if (means.cols() != d) throw std::invalid_argument("mixture means have the wrong dimension");
      std::vector<double> w = spec.mixture_weights;
      if (w.empty()) w.assign(static_cast<std::size_t>(means.rows()), 1.0);
      if (static_cast<Eigen::Index>(w.size()) != means.rows())
        throw std::invalid_argument("mixture weight count differs from component count");
      std::vector<double> cdf(w.size());
      std::partial_sum(w.begin(), w.end(), cdf.begin());
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = rng.uniform() * cdf.back();
        const auto k = static_cast<Eigen::Index>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const Eigen::Index kk = std::min<Eigen::Index>(k, means.rows() - 1);
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = means(kk, j) + spec.mixture_std * rng.normal();
      }
      return z;
    }
    case PriorKind::DataCoupledMixture: {
      if (ctx.bank == nullptr || ctx.bank->rows() == 0)
        throw std::invalid_argument("data-coupled prior needs a non-empty latent bank");
      const Matrix& bank = *ctx.bank;
      if (bank.cols() != d) throw std::invalid_argument("latent bank has the wrong dimension");
      std::vector<Eigen::Index> idx;
      if (n <= bank.rows()) {
        // Shuffle without replacement.
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(bank.rows()));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        idx.assign(perm.begin(), perm.begin() + n);
      } else {
        for (Eigen::Index i = 0; i < n; ++i) idx.push_back(static_cast<Eigen::Index>(rng.below(bank.rows())));
      }
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          z(i, j) = bank(idx[static_cast<std::size_t>(i)], j) + spec.coupled_std * rng.normal();
      return z;
    }
    case PriorKind::LearnableGaussian: {
      if (ctx.store == nullptr) throw std::invalid_argument("learnable prior needs a parameter store");
      const auto& mu_e = ctx.store->at("prior.mu");
      const auto& ls_e = ctx.store->at("prior.log_scale");
      const Matrix& mu = ctx.use_ema ? mu_e.ema : mu_e.value;
      const Matrix& ls = ctx.use_ema ? ls_e.ema : ls_e.value;
      if (mu.cols() != d) throw std::invalid_argument("learnable prior has the wrong dimension");
      const Matrix eps = rng.normal_matrix(n, d);
      return (eps.array().rowwise() * ls.row(0).array().exp()).rowwise() + mu.row(0).array();
    }
  }
  return z;
}

void init_learnable_prior(nn::ParameterStore& store, Eigen::Index d) {
  store.add("prior.mu", Matrix::Zero(1, d));
  store.add("prior.log_scale", Matrix::Zero(1, d));
}

nn::Var learnable_prior_sample(nn::Tape& tape, Eigen::Index n, Eigen::Index d, Rng& rng) {
  nn::Var mu = tape.parameter("prior.mu");
  nn::Var log_scale = tape.parameter("prior.log_scale");
  if (mu.cols() != d) throw std::invalid_argument("learnable prior has the wrong dimension");
  nn::Var eps = tape.constant(rng.normal_matrix(n, d));
  return nn::add_row(nn::mul_row(eps, nn::exp(log_scale)), mu);
}

nn::Var reference_prior_kl(nn::Tape& tape) {
  // sum_j [ log s_j + (1 + mu_j^2) / (2 s_j^2) - 1/2 ]
  nn::Var mu = tape.parameter("prior.mu");
  nn::Var log_scale = tape.parameter("prior.log_scale");
  const Eigen::Index d = mu.cols();
  nn::Var inv_var = nn::exp(nn::scale(log_scale, -2.0));
  nn::Var one = tape.constant(Matrix::Ones(1, d));
  nn::Var quad = nn::mul(nn::add(one, nn::mul(mu, mu)), inv_var);
  nn::Var terms = nn::add(log_scale, nn::scale(quad, 0.5));
  Matrix half = Matrix::Constant(1, 1, -0.5 * static_cast<double>(d));
  return nn::add(nn::sum(terms), tape.constant(half));
}

}  // namespace lsi
