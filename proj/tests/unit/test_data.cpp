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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lsi/nn/optim.hpp"
#include "lsi/objective.hpp"

namespace lsi {
namespace {

constexpr double kPi = std::numbers::pi;

Dataset make(DatasetName name, Eigen::Index n, int lift_dim = 0, std::uint64_t seed = 1) {
  DatasetSpec spec;
  spec.name = name;
  spec.n = n;
  spec.lift_dim = lift_dim;
  Rng rng(seed);
  return make_dataset(spec, rng);
}

TEST(Dataset, NamesRoundTrip) {
  for (auto n : {DatasetName::GaussianRing8, DatasetName::Checkerboard, DatasetName::TwoMoons, DatasetName::Spirals,
                 DatasetName::DiagonalGaussian})
    EXPECT_EQ(dataset_name_from_string(to_string(n)), n);
  EXPECT_THROW(dataset_name_from_string("swiss_roll"), std::invalid_argument);
}

TEST(Dataset, RingGeometry) {
  const Dataset d = make(DatasetName::GaussianRing8, 80000);
  ASSERT_EQ(d.centers.rows(), 8);
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(d.centers(k, 0), 4 * std::cos(2 * kPi * k / 8), 1e-12);
    EXPECT_NEAR(d.centers(k, 1), 4 * std::sin(2 * kPi * k / 8), 1e-12);
  }
  EXPECT_EQ(d.mode_std, 0.3);
  Matrix resid(d.x2d.rows(), 2);
  for (Eigen::Index i = 0; i < d.x2d.rows(); ++i) resid.row(i) = d.x2d.row(i) - d.centers.row(d.labels[i]);
  const Eigen::RowVector2d mean = resid.colwise().mean();
  const Eigen::RowVector2d sd = ((resid.rowwise() - mean).array().square().colwise().mean()).sqrt();
  for (int j = 0; j < 2; ++j) {
    EXPECT_LT(std::abs(mean(j)), 3 * 0.3 / std::sqrt(80000.0));
    EXPECT_NEAR(sd(j), 0.3, 0.005);
  }
}

TEST(Dataset, ClassBalanced) {
  const Dataset d = make(DatasetName::GaussianRing8, 803);
  std::vector<int> count(8, 0);
  for (int l : d.labels) {
    ASSERT_GE(l, 0);
    ASSERT_LT(l, 8);
    ++count[l];
  }
  for (int c : count) {
    EXPECT_GE(c, 100);
    EXPECT_LE(c, 101);
  }
}

TEST(Dataset, DiagonalGaussianMoments) {
  const Dataset d = make(DatasetName::DiagonalGaussian, 100000);
  const Eigen::RowVector2d mean = d.x2d.colwise().mean();
  const Eigen::RowVector2d var = (d.x2d.rowwise() - mean).array().square().colwise().mean();
  EXPECT_NEAR(mean(0), 1.0, 3 * std::sqrt(0.5 / 1e5));
  EXPECT_NEAR(mean(1), -1.0, 3 * std::sqrt(2.0 / 1e5));
  EXPECT_NEAR(var(0), 0.5, 3 * 0.5 * std::sqrt(2e-5));
  EXPECT_NEAR(var(1), 2.0, 3 * 2.0 * std::sqrt(2e-5));
}

TEST(Dataset, SingleSample) {
  for (auto n : {DatasetName::GaussianRing8, DatasetName::Checkerboard, DatasetName::TwoMoons, DatasetName::Spirals}) {
    const Dataset d = make(n, 1, 8);
    EXPECT_EQ(d.x.rows(), 1);
    EXPECT_EQ(d.x.cols(), 8);
    EXPECT_GE(d.labels[0], 0);
    EXPECT_LT(d.labels[0], d.num_classes);
    EXPECT_TRUE(d.x.allFinite());
  }
}

TEST(Dataset, RejectsEmpty) { EXPECT_THROW(make(DatasetName::GaussianRing8, 0), std::invalid_argument); }

TEST(Dataset, DeterministicPerSeed) {
  const Dataset a = make(DatasetName::Spirals, 500, 8, 3);
  const Dataset b = make(DatasetName::Spirals, 500, 8, 3);
  const Dataset c = make(DatasetName::Spirals, 500, 8, 4);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.x, c.x);
}

TEST(Dataset, LiftIsOrthonormalEmbedding) {
  const Dataset d = make(DatasetName::GaussianRing8, 100, 8);
  EXPECT_LT((d.lift.transpose() * d.lift - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT((d.x * d.lift - d.x2d).norm(), 1e-10);
  EXPECT_EQ(lift_matrix(8, 7), lift_matrix(8, 7));
}

TEST(Csv, RoundTripWithLabels) {
  const Dataset d = make(DatasetName::GaussianRing8, 20, 3);
  std::stringstream ss;
  write_csv(ss, d.x, &d.labels);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "x0,x1,x2,label");
  ss.seekg(0);
  std::vector<int> labels;
  const Matrix back = read_csv(ss, &labels);
  EXPECT_EQ(labels, d.labels);
  EXPECT_LT((back - d.x).cwiseAbs().maxCoeff(), 1e-8 * 5);
}

TEST(Csv, HeaderOnly) {
  std::stringstream ss;
  write_csv(ss, Matrix(0, 2));
  EXPECT_EQ(ss.str(), "x0,x1\n");
  const Matrix back = read_csv(ss);
  EXPECT_EQ(back.rows(), 0);
}

TEST(Csv, Malformed) {
  std::stringstream bad("x0,x1\n1.0,abc\n");
  EXPECT_THROW(read_csv(bad), std::runtime_error);
  std::stringstream ragged("x0,x1\n1.0\n");
  EXPECT_THROW(read_csv(ragged), std::runtime_error);
  std::stringstream empty;
  EXPECT_THROW(read_csv(empty), std::runtime_error);
}

TEST(Prior, NamesRoundTrip) {
  for (auto k : {PriorKind::StandardNormal, PriorKind::Uniform, PriorKind::Laplace, PriorKind::GaussianMixture,
                 PriorKind::DataCoupledMixture, PriorKind::LearnableGaussian})
    EXPECT_EQ(prior_kind_from_string(to_string(k)), k);
  EXPECT_THROW(prior_kind_from_string("cauchy"), std::invalid_argument);
}

class UnitVariancePriors : public ::testing::TestWithParam<PriorKind> {};

TEST_P(UnitVariancePriors, ZeroMeanUnitVariance) {
  PriorSpec spec;
  spec.kind = GetParam();
  Rng rng(5);
  const Eigen::Index n = 100000;
  const Matrix z = prior_sample(spec, n, 2, rng);
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Eigen::RowVectorXd var = (z.rowwise() - mean).array().square().colwise().mean();
  for (int j = 0; j < 2; ++j) {
    EXPECT_LT(std::abs(mean(j)), 3 / std::sqrt(double(n)));
    EXPECT_NEAR(var(j), 1.0, 0.02);
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, UnitVariancePriors,
                         ::testing::Values(PriorKind::StandardNormal, PriorKind::Uniform, PriorKind::Laplace));

TEST(Prior, UniformSupport) {
  PriorSpec spec;
  spec.kind = PriorKind::Uniform;
  Rng rng(6);
  const Matrix z = prior_sample(spec, 10000, 3, rng);
  EXPECT_LE(z.cwiseAbs().maxCoeff(), std::sqrt(3.0));
  EXPECT_GT(z.cwiseAbs().maxCoeff(), 0.99 * std::sqrt(3.0));
}

TEST(Prior, LaplaceKurtosis) {
  PriorSpec spec;
  spec.kind = PriorKind::Laplace;
  Rng rng(7);
  const Matrix z = prior_sample(spec, 200000, 1, rng);
  const double m4 = z.array().pow(4).mean();
  EXPECT_NEAR(m4, 6.0, 0.4);  // E z^4 = 24 b^4, b^2 = 1/2
}

TEST(Prior, MixtureMeanIsZero) {
  PriorSpec spec;
  spec.kind = PriorKind::GaussianMixture;
  Rng rng(8);
  const Matrix z = prior_sample(spec, 100000, 2, rng);
  const double var = 0.6 * 0.6 + 0.8 * 0.8 / 2;
  for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(z.col(j).mean()), 3 * std::sqrt(var / 1e5));
}

TEST(Prior, DataCoupledIsBankPlusNoise) {
  PriorSpec spec;
  spec.kind = PriorKind::DataCoupledMixture;
  Matrix bank(4, 2);
  bank << 10, 0, 0, 10, -10, 0, 0, -10;
  Rng rng(9);
  const Matrix z = prior_sample(spec, 4, 2, rng, {.bank = &bank});
  // Without replacement: each bank row used once.
  std::vector<int> used(4, 0);
  for (Eigen::Index i = 0; i < 4; ++i) {
    Eigen::Index best = 0;
    (bank.rowwise() - z.row(i)).rowwise().squaredNorm().minCoeff(&best);
    ++used[best];
    EXPECT_LT((z.row(i) - bank.row(best)).norm(), 0.1 * 6);
  }
  for (int u : used) EXPECT_EQ(u, 1);
  const Matrix many = prior_sample(spec, 40000, 2, rng, {.bank = &bank});
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < many.rows(); ++i) {
    Eigen::Index best = 0;
    (bank.rowwise() - many.row(i)).rowwise().squaredNorm().minCoeff(&best);
    s2 += (many.row(i) - bank.row(best)).squaredNorm();
  }
  EXPECT_NEAR(std::sqrt(s2 / (2 * 40000.0)), 0.1, 0.002);
}

TEST(Prior, DataCoupledNeedsBank) {
  PriorSpec spec;
  spec.kind = PriorKind::DataCoupledMixture;
  Rng rng(1);
  EXPECT_THROW(prior_sample(spec, 4, 2, rng), std::invalid_argument);
  Matrix empty(0, 2);
  EXPECT_THROW(prior_sample(spec, 4, 2, rng, {.bank = &empty}), std::invalid_argument);
}

TEST(Prior, StandardNormalFlag) {
  PriorSpec spec;
  EXPECT_TRUE(is_standard_normal(spec));
  spec.kind = PriorKind::Laplace;
  EXPECT_FALSE(is_standard_normal(spec));
}

TEST(LearnablePrior, ReparameterizedGradients) {
  nn::ParameterStore store;
  init_learnable_prior(store, 2);
  store.at("prior.mu").value << 0.5, -1.0;
  nn::Tape tape(&store);
  Rng rng(3);
  nn::Var z = learnable_prior_sample(tape, 1000, 2, rng);
  tape.backward(nn::sum(z));
  EXPECT_EQ(store.at("prior.mu").grad, Matrix::Constant(1, 2, 1000.0));
  EXPECT_NEAR(z.value().col(0).mean(), 0.5, 0.1);
}

TEST(LearnablePrior, ZeroGradientLeavesParametersUnchanged) {
  nn::ParameterStore store;
  init_learnable_prior(store, 3);
  nn::AdamW opt;
  opt.step(store);
  EXPECT_EQ(store.at("prior.mu").value.norm(), 0.0);
  EXPECT_EQ(store.at("prior.log_scale").value.norm(), 0.0);
}

TEST(LearnablePrior, ReferenceKlClosedForm) {
  nn::ParameterStore store;
  init_learnable_prior(store, 2);
  {
    nn::Tape tape(&store);
    EXPECT_NEAR(reference_prior_kl(tape).scalar(), 0.0, 1e-15);
  }
  store.at("prior.mu").value << 1.0, 0.0;
  store.at("prior.log_scale").value << 0.0, std::log(2.0);
  nn::Tape tape(&store);
  // KL(N(0,1)||N(1,1)) = 1/2; KL(N(0,1)||N(0,4)) = log 2 + 1/8 - 1/2.
  EXPECT_NEAR(reference_prior_kl(tape).scalar(), 0.5 + std::log(2.0) + 0.125 - 0.5, 1e-14);
}

TEST(LearnablePrior, LossGradientReachesPrior) {
  nn::DriftSpec drift;
  drift.hidden = {8};
  drift.time_embed_dim = 4;
  nn::ParameterStore store;
  Rng init(1);
  nn::init_drift(store, drift, init);
  init_learnable_prior(store, 2);
  PriorSpec prior;
  prior.kind = PriorKind::LearnableGaussian;
  LossConfig cfg;
  Rng rng(2);
  nn::Tape tape(&store);
  const Matrix x = init.normal_matrix(32, 2);
  tape.backward(osi_loss(tape, x, {}, drift, prior, make_schedule(ScheduleKind::Linear), cfg, rng).objective);
  EXPECT_GT(store.at("prior.mu").grad.norm(), 0.0);
  EXPECT_GT(store.at("prior.log_scale").grad.norm(), 0.0);
}

}  // namespace
}  // namespace lsi
