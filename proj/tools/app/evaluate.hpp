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


// Sampling presets and the metric report shared by `lsi eval` and the
// acceptance gate.
#pragma once

#include <optional>

#include "app/train.hpp"
#include "lsi/eval.hpp"
#include "lsi/sampling.hpp"

namespace lsi::app {

/// Parameterization preset, the training t_clip, and eps-head scoring for
/// priors other than the standard normal.
SamplerConfig sampler_for(const TrainConfig& cfg, int steps, std::optional<double> grid_exponent = std::nullopt);

/// Inversion preset: as sampler_for, but the step grid is refined towards
/// t = 1 (exponent at least 2) where the field is stiffest. The Euler round
/// trip error is first order in the largest step there.
SamplerConfig inversion_config(const TrainConfig& cfg, int steps, std::optional<double> grid_exponent = std::nullopt);

/// 2D view of observations: undoes the orthonormal lift when there is one.
Matrix project_2d(const TrainConfig& cfg, const Matrix& x);

struct Evaluation {
  MetricReport report;
  SampleRun samples;
};

/// Draws n samples (n = 0: as many as data rows) and compares them with data:
/// energy distance in observation units, histogram KL of the 2D projections,
/// reconstruction PSNR on data (inputs scaled by obs_scale, range 2), per
/// column mean errors and, for the ring, occupancy within 3 std of each mode.
Evaluation evaluate_model(const LoadedModel& m, const Matrix& data, Eigen::Index n, int steps, std::uint64_t seed);

}  // namespace lsi::app
