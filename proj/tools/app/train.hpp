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

// Training loop, checkpoint IO and the run manifest.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "lsi/data.hpp"
#include "lsi/nn/params.hpp"

namespace lsi::app {

struct HistoryEntry {
  int step = 0;
  double total = 0.0;
  double recon = 0.0;
  double drift = 0.0;
  double eps = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
  std::optional<double> energy_distance;
};

struct Splits {
  Dataset train;
  Dataset heldout;
};

/// Regenerates the training and held-out sets from the data seed.
Splits make_splits(const TrainConfig& cfg);

struct TrainResult {
  /// Config with obs_scale resolved; this is what the checkpoint echoes.
  TrainConfig config;
  nn::ModelSpec spec;
  nn::ParameterStore store;
  Splits data;
  std::vector<HistoryEntry> history;
  double wall_seconds = 0.0;
};

struct TrainOptions {
  /// Write checkpoint and manifest to the configured paths.
  bool write_files = true;
  /// Progress lines every log_every steps; nullptr = silent.
  std::ostream* log = nullptr;
};

/// loss -> backward -> AdamW -> EMA, repeated cfg.steps times; afterwards the
/// encoder statistics are calibrated, the latent bank refreshed and all
/// parameters rounded to checkpoint precision. Throws std::runtime_error with
/// the step index on a non-finite loss or gradient.
TrainResult train(const TrainConfig& cfg, const TrainOptions& opts = {});

/// Encoder statistics from the EMA weights on x (original units) and, for the
/// data-coupled prior, a bank of stochastic encodings.
void finalize_encoder(nn::ParameterStore& store, const TrainConfig& cfg, const nn::ModelSpec& spec, const Matrix& x);

struct LoadedModel {
  TrainConfig config;
  nn::ModelSpec spec;
  Schedule schedule;
  nn::ParameterStore store;
};

std::string config_echo(const TrainConfig& cfg);
LoadedModel load_model(const std::filesystem::path& path);
LoadedModel model_from_json(const std::string& config_json, nn::ParameterStore store);

Json run_manifest(const TrainResult& result);
std::string build_id();

}  // namespace lsi::app
