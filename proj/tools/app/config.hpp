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

// Training configuration: JSON with exhaustive key validation.
//
// Every key is optional; missing keys take the defaults below. Unknown keys are
// rejected with their dotted path so typos never silently fall back.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "lsi/data.hpp"
#include "lsi/nn/model.hpp"
#include "lsi/nn/optim.hpp"
#include "lsi/objective.hpp"
#include "lsi/schedules.hpp"

namespace lsi::app {

using Json = nlohmann::ordered_json;

struct DataConfig {
  DatasetName name = DatasetName::GaussianRing8;
  Eigen::Index n_train = 20000;
  Eigen::Index n_heldout = 5000;
  bool labels = false;
  int lift_dim = 8;
  std::uint64_t lift_seed = 7;
  std::uint64_t seed = 1;
};

struct EvalConfig {
  /// 0 disables periodic evaluation.
  int every = 0;
  Eigen::Index samples = 2000;
  int sampler_steps = 100;
};

enum class LrSchedule { Constant, Cosine };

struct TrainConfig {
  DataConfig data;
  PriorSpec prior;
  ScheduleKind schedule = ScheduleKind::Linear;
  double sigma = 1.0;
  int latent_dim = 2;
  LossConfig loss;
  nn::EncoderSpec encoder;
  nn::DecoderSpec decoder;
  nn::DriftSpec drift;
  nn::AdamWConfig optimizer;
  LrSchedule lr_schedule = LrSchedule::Constant;
  /// Cosine schedules decay to lr * lr_floor.
  double lr_floor = 0.05;
  double ema_decay = 0.9999;
  int steps = 20000;
  int batch_size = 256;
  std::uint64_t seed = 0;
  /// Observations are multiplied by obs_scale before encoding; 0 = choose
  /// 1 / max|x| over the training set so that inputs lie in [-1, 1].
  double obs_scale = 0.0;
  /// Encoded training latents stored for the data-coupled prior.
  Eigen::Index bank_size = 4096;
  int log_every = 100;
  EvalConfig eval;
  std::string checkpoint_path = "lsi.ckpt";
  /// Empty = checkpoint_path + ".manifest.json".
  std::string manifest_path;
};

/// Throws std::invalid_argument naming the offending key or value.
TrainConfig config_from_json(const Json& j);
Json config_to_json(const TrainConfig& cfg);
TrainConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (steps > 0, Linear schedule for training, ...).
void validate(const TrainConfig& cfg);

nn::ModelSpec model_spec(const TrainConfig& cfg, int obs_dim);
Schedule schedule_of(const TrainConfig& cfg);
DatasetSpec dataset_spec(const TrainConfig& cfg, Eigen::Index n);

}  // namespace lsi::app
