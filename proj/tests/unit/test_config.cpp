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


#include "app/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace lsi::app {
namespace {

std::string error_of(const Json& j) {
  try {
    validate(config_from_json(j));
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyObjectGivesDefaults) {
  const TrainConfig c = config_from_json(Json::object());
  EXPECT_EQ(c.data.name, DatasetName::GaussianRing8);
  EXPECT_EQ(c.data.lift_dim, 8);
  EXPECT_EQ(c.latent_dim, 2);
  EXPECT_EQ(c.loss.parameterization, Parameterization::InterpFlow);
  EXPECT_EQ(c.loss.beta, 1e-4);
  EXPECT_EQ(c.loss.timechange_exponent, 1.0);
  EXPECT_EQ(c.encoder.noise_mode, nn::NoiseMode::FixedScale);
  EXPECT_EQ(c.encoder.noise_scale, 0.025);
  EXPECT_EQ(c.optimizer.beta1, 0.9);
  EXPECT_EQ(c.optimizer.beta2, 0.99);
  EXPECT_EQ(c.optimizer.eps, 1e-12);
  EXPECT_EQ(c.ema_decay, 0.9999);
  EXPECT_EQ(c.steps, 20000);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, UnknownKeysNameTheirPath) {
  EXPECT_NE(error_of({{"stepz", 10}}).find("'stepz'"), std::string::npos);
  EXPECT_NE(error_of({{"loss", {{"betta", 1e-4}}}}).find("'loss.betta'"), std::string::npos);
  EXPECT_NE(error_of({{"encoder", {{"hidden", {8}}, {"noise", 0.1}}}}).find("'encoder.noise'"), std::string::npos);
}

TEST(Config, WrongTypesAndValues) {
  EXPECT_NE(error_of({{"steps", "many"}}).find("steps"), std::string::npos);
  EXPECT_NE(error_of({{"steps", 0}}).find("steps"), std::string::npos);
  EXPECT_NE(error_of({{"loss", {{"parameterization", "velocity"}}}}), "");
  EXPECT_NE(error_of({{"schedule", {{"kind", "variance_preserving"}}}}), "");
  EXPECT_NE(error_of({{"prior", {{"kind", "laplace"}}}, {"loss", {{"parameterization", "noise_pred"}}}}), "");
  EXPECT_NE(error_of({{"ema_decay", 1.0}}), "");
  EXPECT_NE(error_of({{"data", "ring"}}), "");
}

TEST(Config, RoundTripIsFixedPoint) {
  const Json in = {{"data", {{"name", "checkerboard"}, {"labels", true}, {"lift_dim", 6}}},
                   {"prior", {{"kind", "data_coupled_mixture"}, {"coupled_std", 0.1}}},
                   {"schedule", {{"kind", "linear"}, {"sigma", 0.7}}},
                   {"loss", {{"beta", 1e-3}, {"joint", false}, {"timechange_exponent", 2.0}}},
                   {"encoder", {{"hidden", {32}}, {"noise_mode", "learned"}}},
                   {"drift", {{"hidden", {64, 64}}, {"eps_head", true}}},
                   {"optimizer", {{"lr", 5e-4}, {"lr_schedule", "cosine"}}},
                   {"steps", 123},
                   {"seed", 9}};
  const TrainConfig a = config_from_json(in);
  const Json once = config_to_json(a);
  const Json twice = config_to_json(config_from_json(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once.dump(), twice.dump());
  EXPECT_EQ(a.data.name, DatasetName::Checkerboard);
  EXPECT_EQ(a.prior.kind, PriorKind::DataCoupledMixture);
  EXPECT_EQ(a.encoder.noise_mode, nn::NoiseMode::Learned);
  EXPECT_TRUE(a.drift.eps_head);
  EXPECT_EQ(a.lr_schedule, LrSchedule::Cosine);
  EXPECT_FALSE(a.loss.joint);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "lsi_test_config.json";
  {
    std::ofstream f(path);
    f << R"({"steps": 5, "batch_size": 16})";
  }
  const TrainConfig c = load_config(path);
  EXPECT_EQ(c.steps, 5);
  EXPECT_EQ(c.batch_size, 16);
  {
    std::ofstream f(path);
    f << "{not json";
  }
  EXPECT_THROW(load_config(path), std::invalid_argument);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), std::runtime_error);
}

TEST(Config, ModelSpecFollowsData) {
  TrainConfig c = config_from_json({{"data", {{"labels", true}, {"lift_dim", 5}}}, {"latent_dim", 3}});
  const nn::ModelSpec m = model_spec(c, 5);
  EXPECT_EQ(m.encoder.obs_dim, 5);
  EXPECT_EQ(m.encoder.latent_dim, 3);
  EXPECT_EQ(m.decoder.obs_dim, 5);
  EXPECT_EQ(m.drift.latent_dim, 3);
  EXPECT_EQ(m.drift.num_classes, 8);
}

}  // namespace
}  // namespace lsi::app
