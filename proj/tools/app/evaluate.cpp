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


#include "app/evaluate.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lsi::app {

SamplerConfig sampler_for(const TrainConfig& cfg, int steps, std::optional<double> grid_exponent) {
  SamplerConfig s = preset_for(cfg.loss.parameterization);
  s.n_steps = steps;
  s.t_clip = cfg.loss.t_clip;
  s.score_source = is_standard_normal(cfg.prior) ? ScoreSource::FromDrift : ScoreSource::FromEpsHead;
  if (grid_exponent) s.step_grid_exponent = *grid_exponent;
  return s;
}

SamplerConfig inversion_config(const TrainConfig& cfg, int steps, std::optional<double> grid_exponent) {
  SamplerConfig s = sampler_for(cfg, steps, grid_exponent);
  if (!grid_exponent) s.step_grid_exponent = std::max(s.step_grid_exponent, 2.0);
  return s;
}

Matrix project_2d(const TrainConfig& cfg, const Matrix& x) {
  if (cfg.data.lift_dim > 0) return x * lift_matrix(cfg.data.lift_dim, cfg.data.lift_seed);
  return x.leftCols(std::min<Eigen::Index>(2, x.cols()));
}

Evaluation evaluate_model(const LoadedModel& m, const Matrix& data, Eigen::Index n, int steps, std::uint64_t seed) {
  if (data.cols() != m.spec.encoder.obs_dim)
    throw std::invalid_argument("data has " + std::to_string(data.cols()) + " columns, model expects " +
                                std::to_string(m.spec.encoder.obs_dim));
  if (data.rows() < 2) throw std::invalid_argument("eval needs at least 2 data rows");
  SamplerConfig cfg = sampler_for(m.config, steps);
  cfg.seed = seed;
  Evaluation ev;
  ev.samples = sample(m.store, m.spec, m.schedule, m.config.prior, cfg, n > 0 ? n : data.rows());
  const Matrix& x = ev.samples.observations;
  MetricReport& rep = ev.report;
  rep.energy_distance = energy_distance(x, data);
  const Matrix d2 = project_2d(m.config, data);
  const Matrix s2 = project_2d(m.config, x);
  const Eigen::VectorXd lo = d2.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = d2.colwise().maxCoeff().transpose();
  const Eigen::VectorXd pad = 0.1 * (hi - lo).cwiseMax(1e-6);
  rep.histogram_kl = histogram_kl(d2, s2, 32, lo - pad, hi + pad);
  const Matrix recon = decode(m.store, m.spec, encode_deterministic(m.store, m.spec, data));
  rep.psnr_db = psnr(data * m.spec.obs_scale, recon * m.spec.obs_scale, 2.0);
  const Eigen::VectorXd mean_err = (x.colwise().mean() - data.colwise().mean()).transpose();
  rep.moment_errors.assign(mean_err.data(), mean_err.data() + mean_err.size());
  if (m.config.data.name == DatasetName::GaussianRing8) {
    Rng unused(0);
    const Dataset ref = make_dataset(dataset_spec(m.config, 8), unused);
    rep.mode_occupancy = mode_occupancy(s2, ref.centers, 3.0 * ref.mode_std);
  }
  return ev;
}

}  // namespace lsi::app
