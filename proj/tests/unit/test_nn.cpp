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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "app/verify.hpp"
#include "lsi/nn/checkpoint.hpp"
#include "lsi/nn/layers.hpp"
#include "lsi/nn/model.hpp"
#include "lsi/nn/optim.hpp"
#include "lsi/nn/params.hpp"
#include "lsi/nn/tape.hpp"

namespace lsi::nn {
namespace {

using Op = std::function<Var(Tape&, Var)>;

// Central differences of sum(w .* op(x)) against reverse mode.
double op_gradient_error(const Op& op, Matrix x0, std::uint64_t seed) {
  Rng rng(seed);
  ParameterStore store;
  store.add("x", x0);
  Matrix w;
  auto value = [&](const Matrix& x) {
    store.at("x").value = x;
    Tape tape(&store, ParamSource::Live, false);
    Var y = op(tape, tape.parameter("x"));
    if (w.size() == 0) w = rng.normal_matrix(y.rows(), y.cols());
    return (y.value().array() * w.array()).sum();
  };
  value(x0);
  store.at("x").value = x0;
  store.zero_grad();
  {
    Tape tape(&store);
    Var y = op(tape, tape.parameter("x"));
    tape.backward(sum(mul(y, tape.constant(w))));
  }
  const Matrix analytic = store.at("x").grad;
  double worst = 0.0;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Matrix p = x0, m = x0;
    p(i) += h;
    m(i) -= h;
    const double fd = (value(p) - value(m)) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic(i)) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

TEST(Tape, SquareAtThree) {
  ParameterStore store;
  store.add("w", Matrix::Constant(1, 1, 3.0));
  Tape tape(&store);
  Var w = tape.parameter("w");
  tape.backward(mul(w, w));
  EXPECT_DOUBLE_EQ(store.at("w").grad(0, 0), 6.0);
}

TEST(Tape, OpGradientsMatchFiniteDifferences) {
  Rng rng(1);
  const Matrix x = rng.normal_matrix(4, 3);
  const Matrix other = rng.normal_matrix(4, 3);
  const Matrix right = rng.normal_matrix(3, 2);
  const Matrix row = rng.normal_matrix(1, 3);
  const Eigen::VectorXd rs = rng.normal_vector(4);
  const std::vector<Eigen::Index> idx{2, 0, 2, 3, 1};
  const std::vector<std::pair<const char*, Op>> ops = {
      {"matmul", [&](Tape& t, Var a) { return matmul(a, t.constant(right)); }},
      {"matmul_left", [&](Tape& t, Var a) { return matmul(t.constant(right.transpose()), slice_cols(a, 0, 3).value().rows() == 4 ? matmul(t.constant(Matrix::Identity(3, 4)), a) : a); }},
      {"add", [&](Tape& t, Var a) { return add(a, t.constant(other)); }},
      {"sub", [&](Tape& t, Var a) { return sub(t.constant(other), a); }},
      {"mul", [&](Tape& t, Var a) { return mul(a, a); }},
      {"scale", [&](Tape&, Var a) { return scale(a, -2.5); }},
      {"add_row", [&](Tape& t, Var a) { return add_row(t.constant(other), slice_cols(gather_rows(a, std::vector<Eigen::Index>{1}), 0, 3)); }},
      {"mul_row", [&](Tape& t, Var a) { return mul_row(a, t.constant(row)); }},
      {"mul_row_broadcast", [&](Tape& t, Var a) { return mul_row(t.constant(other), gather_rows(a, std::vector<Eigen::Index>{0})); }},
      {"row_scale", [&](Tape&, Var a) { return row_scale(a, rs); }},
      {"tanh", [&](Tape&, Var a) { return tanh(a); }},
      {"silu", [&](Tape&, Var a) { return silu(a); }},
      {"exp", [&](Tape&, Var a) { return exp(scale(a, 0.5)); }},
      {"concat", [&](Tape& t, Var a) { Var parts[] = {a, t.constant(other), tanh(a)}; return concat_cols(parts); }},
      {"standardize", [&](Tape&, Var a) { return standardize_cols(a, 1e-5); }},
      {"normalize", [&](Tape&, Var a) { return normalize_cols(a, row, row.cwiseAbs2(), 1e-5); }},
      {"mean_square", [&](Tape&, Var a) { return mean_square(a); }},
      {"sum", [&](Tape&, Var a) { return sum(a); }},
      {"gather", [&](Tape&, Var a) { return gather_rows(a, idx); }},
      {"slice", [&](Tape&, Var a) { return slice_cols(a, 1, 2); }},
  };
  for (const auto& [name, op] : ops) EXPECT_LT(op_gradient_error(op, x, 7), 1e-7) << name;
}

TEST(Tape, StopGradient) {
  ParameterStore store;
  store.add("x", Matrix::Constant(2, 2, 1.5));
  Tape tape(&store);
  Var x = tape.parameter("x");
  Var y = stop_gradient(x);
  EXPECT_EQ(y.value(), x.value());
  tape.backward(sum(mul(y, y)));
  EXPECT_EQ(store.at("x").grad.norm(), 0.0);
}

TEST(Tape, NonRecordingTapeKeepsNoGradients) {
  ParameterStore store;
  store.add("x", Matrix::Constant(1, 1, 2.0));
  Tape tape(&store, ParamSource::Live, false);
  Var x = tape.parameter("x");
  EXPECT_FALSE(tape.requires_grad(x));
}

TEST(Tape, EmaSourceReadsShadow) {
  ParameterStore store;
  auto& e = store.add("x", Matrix::Constant(1, 1, 2.0));
  e.ema(0, 0) = 5.0;
  Tape tape(&store, ParamSource::Ema, false);
  EXPECT_EQ(tape.parameter("x").scalar(), 5.0);
}

TEST(ParameterStore, DuplicateAndMissingNames) {
  ParameterStore store;
  store.add("a", Matrix::Zero(1, 1));
  EXPECT_THROW(store.add("a", Matrix::Zero(1, 1)), std::invalid_argument);
  EXPECT_EQ(store.find("b"), nullptr);
}

TEST(ParameterStore, NonFiniteGradientNamesParameter) {
  ParameterStore store;
  store.add("ok", Matrix::Zero(1, 1));
  store.add("bad", Matrix::Zero(1, 1));
  store.at("bad").grad(0, 0) = std::nan("");
  try {
    store.check_finite_grads();
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(ParameterStore, FlatRoundTripSkipsBuffers) {
  ParameterStore store;
  store.add("w", Matrix::Constant(2, 2, 1.0));
  store.add("buf", Matrix::Constant(1, 3, 7.0), false);
  EXPECT_EQ(store.num_scalars(), 4u);
  EXPECT_EQ(store.num_scalars(false), 7u);
  Eigen::VectorXd flat = store.flat_values();
  flat.setConstant(2.0);
  store.set_flat_values(flat);
  EXPECT_EQ(store.at("w").value(1, 1), 2.0);
  EXPECT_EQ(store.at("buf").value(0, 0), 7.0);
}

TEST(AdamW, FirstStepMovesBySignTimesLr) {
  ParameterStore store;
  store.add("w", (Matrix(1, 3) << 1.0, -2.0, 0.5).finished());
  store.at("w").grad = (Matrix(1, 3) << 3.0, -0.1, 7.0).finished();
  AdamW opt({.lr = 0.01});
  opt.step(store);
  const Matrix& w = store.at("w").value;
  EXPECT_NEAR(w(0), 1.0 - 0.01, 1e-12);
  EXPECT_NEAR(w(1), -2.0 + 0.01, 1e-12);
  EXPECT_NEAR(w(2), 0.5 - 0.01, 1e-12);
  EXPECT_EQ(store.step, 1);
}

TEST(AdamW, ZeroGradientWithoutDecayLeavesParameters) {
  ParameterStore store;
  store.add("w", Matrix::Constant(2, 2, 0.3));
  AdamW opt;
  for (int i = 0; i < 10; ++i) opt.step(store);
  EXPECT_EQ(store.at("w").value, Matrix::Constant(2, 2, 0.3));
}

TEST(AdamW, DecoupledWeightDecayShrinks) {
  ParameterStore store;
  store.add("w", Matrix::Constant(1, 1, 1.0));
  AdamW opt({.lr = 0.1, .weight_decay = 0.5});
  opt.step(store);
  EXPECT_NEAR(store.at("w").value(0, 0), 0.95, 1e-12);
}

TEST(AdamW, QuadraticBowlConverges) {
  ParameterStore store;
  store.add("w", (Matrix(1, 4) << 1.0, -3.0, 0.5, 2.0).finished());
  const Matrix target = (Matrix(1, 4) << 0.2, 0.1, -0.4, 1.0).finished();
  const Matrix curv = (Matrix(1, 4) << 1.0, 3.0, 0.5, 2.0).finished();
  AdamW opt({.lr = 1e-2});
  for (int i = 0; i < 2000; ++i) {
    auto& e = store.at("w");
    e.grad = curv.cwiseProduct(e.value - target);
    opt.step(store);
  }
  const Matrix d = store.at("w").value - target;
  EXPECT_LT(0.5 * (curv.cwiseProduct(d.cwiseAbs2())).sum(), 1e-8);
}

TEST(AdamW, BuffersNeverMove) {
  ParameterStore store;
  store.add("buf", Matrix::Constant(1, 1, 1.0), false);
  store.at("buf").grad(0, 0) = 1.0;
  AdamW opt;
  opt.step(store);
  EXPECT_EQ(store.at("buf").value(0, 0), 1.0);
}

TEST(Ema, DecayZeroCopies) {
  ParameterStore store;
  auto& e = store.add("w", Matrix::Constant(1, 2, 1.0));
  e.value.setConstant(4.0);
  ema_update(store, 0.0);
  EXPECT_EQ(store.at("w").ema, store.at("w").value);
}

TEST(Ema, GeometricConvergence) {
  ParameterStore store;
  store.add("w", Matrix::Zero(1, 1));
  store.at("w").value(0, 0) = 1.0;
  for (int k = 1; k <= 50; ++k) {
    ema_update(store, 0.9);
    EXPECT_NEAR(store.at("w").ema(0, 0), 1.0 - std::pow(0.9, k), 1e-12);
  }
  EXPECT_THROW(ema_update(store, 1.0), std::invalid_argument);
}

ModelSpec small_spec() {
  ModelSpec spec;
  spec.encoder.obs_dim = spec.decoder.obs_dim = 4;
  spec.encoder.hidden = spec.decoder.hidden = {6};
  spec.drift.hidden = {6};
  spec.drift.time_embed_dim = 4;
  return spec;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  ModelSpec spec = small_spec();
  ParameterStore store;
  Rng rng(3);
  init_model(store, spec, rng);
  for (auto& e : store.entries()) e.ema = e.value + 0.01 * rng.normal_matrix(e.value.rows(), e.value.cols());
  store.step = 123;
  const auto bytes = serialize_checkpoint(store, R"({"a":1})");
  ASSERT_GE(bytes.size(), 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "LSIC");
  const auto loaded = deserialize_checkpoint(bytes);
  EXPECT_EQ(loaded.store.step, 123);
  EXPECT_EQ(serialize_checkpoint(loaded.store, loaded.config_json), bytes);
  for (const auto& e : store.entries()) {
    const auto& l = loaded.store.at(e.name);
    EXPECT_EQ(l.trainable, e.trainable);
    EXPECT_LT((l.value - e.value).cwiseAbs().maxCoeff(), 1e-6 * (1 + e.value.cwiseAbs().maxCoeff()));
  }
}

TEST(Checkpoint, QuantizedStoreRoundTripsExactly) {
  ParameterStore store;
  Rng rng(4);
  store.add("w", rng.normal_matrix(3, 3));
  store.quantize_f32();
  const auto loaded = deserialize_checkpoint(serialize_checkpoint(store, "{}"));
  EXPECT_EQ(loaded.store.at("w").value, store.at("w").value);
}

TEST(Checkpoint, MissingOrCorruptFile) {
  EXPECT_THROW(load_checkpoint("/nonexistent/lsi.ckpt"), std::runtime_error);
  std::vector<std::uint8_t> junk{'N', 'O', 'P', 'E', 0, 0, 0, 0};
  EXPECT_THROW(deserialize_checkpoint(junk), std::runtime_error);
  ParameterStore store;
  store.add("w", Matrix::Ones(2, 2));
  auto bytes = serialize_checkpoint(store, "{}");
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(deserialize_checkpoint(bytes), std::runtime_error);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "lsi_test_roundtrip.ckpt";
  ParameterStore store;
  store.add("w", Matrix::Constant(2, 3, 0.25));
  save_checkpoint(path, store, "{}");
  const auto loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.store.at("w").value, store.at("w").value);
  std::filesystem::remove(path);
}

void zero_all(ParameterStore& store) {
  for (auto& e : store.entries()) {
    e.value.setZero();
    e.ema.setZero();
  }
}

TEST(Model, ZeroWeightsGiveZeroOutputs) {
  ModelSpec spec = small_spec();
  ParameterStore store;
  Rng rng(1);
  init_model(store, spec, rng);
  zero_all(store);
  Tape tape(&store);
  const Matrix x = rng.normal_matrix(5, 4);
  const auto enc = forward_encoder(tape, spec.encoder, tape.constant(x), rng, EncodeMode::EvalDeterministic);
  EXPECT_EQ(enc.z1.value().norm(), 0.0);
  EXPECT_EQ(forward_decoder(tape, spec.decoder, tape.constant(rng.normal_matrix(5, 2))).value().norm(), 0.0);
  const auto d = forward_drift(tape, spec.drift, tape.constant(rng.normal_matrix(5, 2)), Eigen::VectorXd::Constant(5, 0.3), {});
  EXPECT_EQ(d.hat.value().norm(), 0.0);
}

TEST(Model, FixedScaleNoiseAddedAfterBound) {
  ModelSpec spec = small_spec();
  spec.encoder.noise_scale = 0.05;
  ParameterStore store;
  Rng rng(2);
  init_model(store, spec, rng);
  const Matrix x = rng.normal_matrix(50, 4);
  Tape tape(&store);
  Rng a(9), b(9);
  const auto det = forward_encoder(tape, spec.encoder, tape.constant(x), a, EncodeMode::EvalDeterministic);
  const auto sto = forward_encoder(tape, spec.encoder, tape.constant(x), a, EncodeMode::Eval);
  const Matrix eps = b.normal_matrix(50, 2);
  EXPECT_LT((sto.z1.value() - det.z1.value() - 0.05 * eps).norm(), 1e-14);
  EXPECT_LT(det.z1.value().cwiseAbs().maxCoeff(), 1.0);
}

TEST(Model, TrainModeLatentsAreBounded) {
  ModelSpec spec = small_spec();
  spec.encoder.noise_scale = 0.025;
  ParameterStore store;
  Rng rng(3);
  init_model(store, spec, rng);
  const Matrix x = 5.0 * rng.normal_matrix(4000, 4);
  Tape tape(&store);
  const auto out = forward_encoder(tape, spec.encoder, tape.constant(x), rng, EncodeMode::Train);
  EXPECT_LT(out.mu.value().cwiseAbs().maxCoeff(), 1.0);
  const double bound = 1.0 + 3 * 0.025;
  const double inside = (out.z1.value().array().abs() <= bound).cast<double>().mean();
  EXPECT_GE(inside, 0.997);
}

TEST(Model, DriftFiniteAtEndpointsAndNullLabel) {
  ModelSpec spec = small_spec();
  spec.drift.num_classes = 3;
  ParameterStore store;
  Rng rng(4);
  init_model(store, spec, rng);
  for (auto& e : store.entries()) e.value += 0.1 * rng.normal_matrix(e.value.rows(), e.value.cols());
  Tape tape(&store);
  const Matrix z = rng.normal_matrix(4, 2);
  const Eigen::VectorXd t = (Eigen::VectorXd(4) << 0.0, 1.0, 0.0, 1.0).finished();
  const std::vector<int> labels{0, 2, -1, -1};
  const auto d = forward_drift(tape, spec.drift, tape.constant(z), t, labels);
  EXPECT_TRUE(d.hat.value().allFinite());
  // Rows 2 and 3 share the null embedding; row 0 differs from row 2 only by its label.
  const auto d2 = forward_drift(tape, spec.drift, tape.constant(z), t, std::vector<int>{-1, -1, -1, -1});
  EXPECT_EQ(d.hat.value().row(2), d2.hat.value().row(2));
  EXPECT_NE(d.hat.value().row(0), d2.hat.value().row(0));
  const std::vector<int> bad{0, 3, 0, 0};
  EXPECT_THROW(forward_drift(tape, spec.drift, tape.constant(z), t, bad), std::invalid_argument);
}

TEST(Model, OneHotNullSlot) {
  const Matrix oh = one_hot(std::vector<int>{1, -1}, 2);
  EXPECT_EQ(oh.cols(), 3);
  EXPECT_EQ(oh(0, 1), 1.0);
  EXPECT_EQ(oh(1, 2), 1.0);
  EXPECT_EQ(oh.sum(), 2.0);
}

TEST(Model, TimeEmbeddingFinite) {
  const Matrix e = time_embedding((Eigen::VectorXd(3) << 0.0, 0.5, 1.0).finished(), 16);
  EXPECT_EQ(e.cols(), 16);
  EXPECT_TRUE(e.allFinite());
}

TEST(Model, DecoderOverfitsSmallSet) {
  ModelSpec spec = small_spec();
  spec.decoder.hidden = {32, 32};
  ParameterStore store;
  Rng rng(5);
  init_decoder(store, spec.decoder, rng);
  const Matrix z = rng.normal_matrix(16, 2);
  const Matrix lift = lift_matrix(4, 1);
  const Matrix x = z * lift.transpose();
  AdamW opt({.lr = 3e-3});
  double mse = 1.0;
  for (int i = 0; i < 3000 && mse >= 1e-4; ++i) {
    store.zero_grad();
    Tape tape(&store);
    Var l = mean_square(sub(forward_decoder(tape, spec.decoder, tape.constant(z)), tape.constant(x)));
    tape.backward(l);
    opt.step(store);
    mse = l.scalar();
  }
  EXPECT_LT(mse, 1e-3);
}

TEST(Model, ComposedLossGradientMatchesFiniteDifferences) {
  const auto r = app::check_gradients(20, 3);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_LE(r.metrics["parameters"].get<int>(), 100);
}

}  // namespace
}  // namespace lsi::nn
