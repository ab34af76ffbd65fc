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

#include "app/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "lsi/eval.hpp"
#include "lsi/nn/checkpoint.hpp"
#include "lsi/nn/optim.hpp"
#include "lsi/nn/tape.hpp"
#include "lsi/sampling.hpp"

namespace lsi::app {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double learning_rate(const TrainConfig& cfg, int step) {
  if (cfg.lr_schedule == LrSchedule::Constant) return cfg.optimizer.lr;
  const double progress = static_cast<double>(step) / cfg.steps;
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return cfg.optimizer.lr * (cfg.lr_floor + (1.0 - cfg.lr_floor) * cosine);
}

double quick_energy(const nn::ParameterStore& store, const TrainConfig& cfg, const nn::ModelSpec& spec,
                    const Dataset& heldout) {
  SamplerConfig sc = preset_for(cfg.loss.parameterization);
  sc.n_steps = cfg.eval.sampler_steps;
  sc.t_clip = cfg.loss.t_clip;
  sc.score_source = is_standard_normal(cfg.prior) ? ScoreSource::FromDrift : ScoreSource::FromEpsHead;
  sc.seed = cfg.seed + 1;
  const Eigen::Index n = std::min<Eigen::Index>(cfg.eval.samples, heldout.x.rows());
  if (n < 2) return std::nan("");
  const SampleRun run = sample(store, spec, schedule_of(cfg), cfg.prior, sc, n);
  return energy_distance(run.observations, heldout.x.topRows(n));
}

}  // namespace

Splits make_splits(const TrainConfig& cfg) {
  const Rng root(cfg.data.seed);
  Rng a = root.split(0);
  Rng b = root.split(1);
  Splits s;
  s.train = make_dataset(dataset_spec(cfg, cfg.data.n_train), a);
  if (cfg.data.n_heldout > 0) s.heldout = make_dataset(dataset_spec(cfg, cfg.data.n_heldout), b);
  return s;
}

void finalize_encoder(nn::ParameterStore& store, const TrainConfig& cfg, const nn::ModelSpec& spec, const Matrix& x) {
  nn::calibrate_encoder(store, spec.encoder, x * spec.obs_scale, nn::ParamSource::Ema);
  if (cfg.prior.kind != PriorKind::DataCoupledMixture) return;
  const Eigen::Index n = std::min<Eigen::Index>(cfg.bank_size, x.rows());
  Rng rng = Rng(cfg.seed).split(99);
  nn::Tape tape(&store, nn::ParamSource::Ema, false);
  const nn::EncoderOutput e = nn::forward_encoder(tape, spec.encoder, tape.constant(x.topRows(n) * spec.obs_scale),
                                                  rng, nn::EncodeMode::Eval);
  if (nn::ParamEntry* bank = store.find("prior.bank")) {
    bank->value = e.z1.value();
    bank->ema = bank->value;
    bank->grad.setZero(bank->value.rows(), bank->value.cols());
  } else {
    store.add("prior.bank", e.z1.value(), false);
  }
}

TrainResult train(const TrainConfig& cfg_in, const TrainOptions& opts) {
  validate(cfg_in);
  const auto t0 = Clock::now();
  TrainResult r;
  r.config = cfg_in;
  r.data = make_splits(cfg_in);
  const Matrix& x = r.data.train.x;
  if (r.config.obs_scale <= 0.0) {
    const double m = x.cwiseAbs().maxCoeff();
    // Rounded through float so the echoed value reloads exactly.
    r.config.obs_scale = m > 0.0 ? static_cast<double>(static_cast<float>(1.0 / m)) : 1.0;
  }
  const TrainConfig& cfg = r.config;
  r.spec = model_spec(cfg, static_cast<int>(x.cols()));
  const Schedule sched = schedule_of(cfg);

  const Rng root(cfg.seed);
  Rng init_rng = root.split(1);
  nn::init_model(r.store, r.spec, init_rng);
  if (cfg.prior.kind == PriorKind::LearnableGaussian) init_learnable_prior(r.store, cfg.latent_dim);
  r.store.sync_ema();

  nn::AdamW opt(cfg.optimizer);
  Rng batch_rng = root.split(2);
  Rng loss_rng = root.split(3);
  const bool use_labels = r.spec.drift.num_classes > 0;
  Matrix xb(cfg.batch_size, x.cols());
  std::vector<int> lb(use_labels ? static_cast<std::size_t>(cfg.batch_size) : 0);

  double acc_total = 0.0, acc_recon = 0.0, acc_drift = 0.0, acc_eps = 0.0;
  int acc_n = 0;
  for (int step = 1; step <= cfg.steps; ++step) {
    for (int i = 0; i < cfg.batch_size; ++i) {
      const auto k = static_cast<Eigen::Index>(batch_rng.below(static_cast<std::uint64_t>(x.rows())));
      xb.row(i) = x.row(k);
      if (use_labels) lb[static_cast<std::size_t>(i)] = r.data.train.labels[static_cast<std::size_t>(k)];
    }
    r.store.zero_grad();
    nn::Tape tape(&r.store);
    LossBreakdown loss;
    try {
      loss = lsi_loss(tape, xb, lb, r.spec, cfg.prior, sched, cfg.loss, loss_rng);
      tape.backward(loss.objective);
      r.store.check_finite_grads();
      opt.config().lr = learning_rate(cfg, step - 1);
      opt.step(r.store);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("training aborted at step " + std::to_string(step) + ": " + e.what());
    }
    nn::ema_update(r.store, cfg.ema_decay);

    acc_total += loss.total;
    acc_recon += loss.recon_term;
    acc_drift += loss.drift_term;
    acc_eps += loss.eps_term;
    ++acc_n;
    const bool log_now = step % cfg.log_every == 0 || step == cfg.steps;
    const bool eval_now = cfg.eval.every > 0 && (step % cfg.eval.every == 0) && r.data.heldout.x.rows() >= 2;
    if (log_now || eval_now) {
      HistoryEntry h;
      h.step = step;
      h.total = acc_total / acc_n;
      h.recon = acc_recon / acc_n;
      h.drift = acc_drift / acc_n;
      h.eps = acc_eps / acc_n;
      h.lr = opt.config().lr;
      if (eval_now) {
        finalize_encoder(r.store, cfg, r.spec, x);
        h.energy_distance = quick_energy(r.store, cfg, r.spec, r.data.heldout);
      }
      h.wall_seconds = seconds_since(t0);
      if (opts.log) {
        *opts.log << "step " << step << " loss " << h.total << " recon " << h.recon << " drift " << h.drift;
        if (r.spec.drift.eps_head) *opts.log << " eps " << h.eps;
        if (h.energy_distance) *opts.log << " energy " << *h.energy_distance;
        *opts.log << " (" << h.wall_seconds << " s)\n";
      }
      r.history.push_back(h);
      acc_total = acc_recon = acc_drift = acc_eps = 0.0;
      acc_n = 0;
    }
  }

  finalize_encoder(r.store, cfg, r.spec, x);
  r.store.quantize_f32();
  r.wall_seconds = seconds_since(t0);
  if (opts.write_files) {
    nn::save_checkpoint(cfg.checkpoint_path, r.store, config_echo(cfg));
    const std::string manifest = cfg.manifest_path.empty() ? cfg.checkpoint_path + ".manifest.json" : cfg.manifest_path;
    std::ofstream out(manifest);
    if (!out) throw std::runtime_error("cannot write manifest " + manifest);
    out << run_manifest(r).dump(2) << "\n";
  }
  return r;
}

std::string config_echo(const TrainConfig& cfg) { return config_to_json(cfg).dump(); }

LoadedModel model_from_json(const std::string& config_json, nn::ParameterStore store) {
  LoadedModel m;
  Json j;
  try {
    j = Json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  m.config = config_from_json(j);
  const int obs_dim = observation_dim(dataset_spec(m.config, 1));
  m.spec = model_spec(m.config, obs_dim);
  m.schedule = schedule_of(m.config);
  m.store = std::move(store);
  return m;
}

LoadedModel load_model(const std::filesystem::path& path) {
  nn::LoadedCheckpoint ck = nn::load_checkpoint(path);
  return model_from_json(ck.config_json, std::move(ck.store));
}

std::string build_id() {
  std::string id = "lsi-0.1.0";
#if defined(__clang__)
  id += " clang-" + std::to_string(__clang_major__) + "." + std::to_string(__clang_minor__);
#elif defined(__GNUC__)
  id += " gcc-" + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__);
#endif
#ifdef NDEBUG
  id += " release";
#else
  id += " debug";
#endif
  return id;
}

Json run_manifest(const TrainResult& r) {
  Json j;
  j["config"] = config_to_json(r.config);
  j["build_id"] = build_id();
  j["parameters"] = r.store.num_scalars();
  Json hist = Json::array();
  for (const HistoryEntry& h : r.history) {
    Json e = {{"step", h.step}, {"loss", h.total}, {"recon", h.recon}, {"drift", h.drift},
              {"eps", h.eps},   {"lr", h.lr},      {"wall_seconds", h.wall_seconds}};
    if (h.energy_distance) e["energy_distance"] = *h.energy_distance;
    hist.push_back(e);
  }
  j["history"] = hist;
  j["wall_clock_seconds"] = r.wall_seconds;
  return j;
}

}  // namespace lsi::app
