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

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lsi::app {
namespace {

// Reads keys from one JSON object and remembers which were consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(where() + " must be a JSON object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw std::invalid_argument("unknown config key '" + child(key) + "'");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config key '" + child(key) + "' has the wrong type");
    }
  }

  template <class E, class Parse>
  void get_enum(const char* key, E& out, Parse parse) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config key '" + child(key) + "': " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& sub(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string_view to_string(LrSchedule s) { return s == LrSchedule::Constant ? "constant" : "cosine"; }
LrSchedule lr_schedule_from_string(std::string_view s) {
  if (s == "constant") return LrSchedule::Constant;
  if (s == "cosine") return LrSchedule::Cosine;
  throw std::invalid_argument("unknown lr schedule '" + std::string(s) + "'");
}

std::string_view to_string(nn::CodecKind k) { return k == nn::CodecKind::Mlp ? "mlp" : "identity"; }
nn::CodecKind codec_from_string(std::string_view s) {
  if (s == "mlp") return nn::CodecKind::Mlp;
  if (s == "identity") return nn::CodecKind::Identity;
  throw std::invalid_argument("unknown codec kind '" + std::string(s) + "'");
}

void read_prior(Section& sec, PriorSpec& p) {
  sec.get_enum("kind", p.kind, prior_kind_from_string);
  if (sec.has("mixture_means")) {
    std::vector<std::vector<double>> rows;
    try {
      rows = sec.sub("mixture_means").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config key '" + sec.child("mixture_means") + "' must be a list of rows");
    }
    if (!rows.empty()) {
      p.mixture_means.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
          throw std::invalid_argument("config key '" + sec.child("mixture_means") + "' has ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
          p.mixture_means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
  }
  sec.get("mixture_weights", p.mixture_weights);
  sec.get("mixture_std", p.mixture_std);
  sec.get("coupled_std", p.coupled_std);
}

Json prior_json(const PriorSpec& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < p.mixture_means.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(p.mixture_means.cols()));
    for (Eigen::Index k = 0; k < p.mixture_means.cols(); ++k) r[static_cast<std::size_t>(k)] = p.mixture_means(i, k);
    rows.push_back(r);
  }
  j["mixture_means"] = rows;
  j["mixture_weights"] = p.mixture_weights;
  j["mixture_std"] = p.mixture_std;
  j["coupled_std"] = p.coupled_std;
  return j;
}

}  // namespace

TrainConfig config_from_json(const Json& j) {
  TrainConfig c;
  Section root(j, "");
  if (root.has("data")) {
    Section s(root.sub("data"), "data");
    s.get_enum("name", c.data.name, dataset_name_from_string);
    s.get("n_train", c.data.n_train);
    s.get("n_heldout", c.data.n_heldout);
    s.get("labels", c.data.labels);
    s.get("lift_dim", c.data.lift_dim);
    s.get("lift_seed", c.data.lift_seed);
    s.get("seed", c.data.seed);
  }
  if (root.has("prior")) {
    Section s(root.sub("prior"), "prior");
    read_prior(s, c.prior);
  }
  if (root.has("schedule")) {
    Section s(root.sub("schedule"), "schedule");
    s.get_enum("kind", c.schedule, schedule_kind_from_string);
    s.get("sigma", c.sigma);
  }
  root.get("latent_dim", c.latent_dim);
  if (root.has("loss")) {
    Section s(root.sub("loss"), "loss");
    s.get_enum("parameterization", c.loss.parameterization, parameterization_from_string);
    s.get("beta", c.loss.beta);
    s.get("timechange_exponent", c.loss.timechange_exponent);
    s.get("joint", c.loss.joint);
    s.get("t_clip", c.loss.t_clip);
    s.get("recon_weight", c.loss.recon_weight);
    s.get("eps_head_weight", c.loss.eps_head_weight);
    s.get("prior_reference_kl", c.loss.prior_reference_kl);
    s.get("gaussian_fast_path", c.loss.gaussian_fast_path);
    s.get("exact_elbo_weighting", c.loss.exact_elbo_weighting);
  }
  if (root.has("encoder")) {
    Section s(root.sub("encoder"), "encoder");
    s.get_enum("kind", c.encoder.kind, codec_from_string);
    s.get("hidden", c.encoder.hidden);
    s.get_enum("noise_mode", c.encoder.noise_mode, nn::noise_mode_from_string);
    s.get("noise_scale", c.encoder.noise_scale);
    s.get("bound_latents", c.encoder.bound_latents);
    s.get("norm_eps", c.encoder.norm_eps);
  }
  if (root.has("decoder")) {
    Section s(root.sub("decoder"), "decoder");
    s.get_enum("kind", c.decoder.kind, codec_from_string);
    s.get("hidden", c.decoder.hidden);
  }
  if (root.has("drift")) {
    Section s(root.sub("drift"), "drift");
    s.get("hidden", c.drift.hidden);
    s.get("time_embed_dim", c.drift.time_embed_dim);
    s.get("class_embed_dim", c.drift.class_embed_dim);
    s.get("label_drop", c.drift.label_drop);
    s.get("eps_head", c.drift.eps_head);
  }
  if (root.has("optimizer")) {
    Section s(root.sub("optimizer"), "optimizer");
    s.get("lr", c.optimizer.lr);
    s.get("beta1", c.optimizer.beta1);
    s.get("beta2", c.optimizer.beta2);
    s.get("eps", c.optimizer.eps);
    s.get("weight_decay", c.optimizer.weight_decay);
    s.get_enum("lr_schedule", c.lr_schedule, lr_schedule_from_string);
    s.get("lr_floor", c.lr_floor);
  }
  root.get("ema_decay", c.ema_decay);
  root.get("steps", c.steps);
  root.get("batch_size", c.batch_size);
  root.get("seed", c.seed);
  root.get("obs_scale", c.obs_scale);
  root.get("bank_size", c.bank_size);
  root.get("log_every", c.log_every);
  if (root.has("eval")) {
    Section s(root.sub("eval"), "eval");
    s.get("every", c.eval.every);
    s.get("samples", c.eval.samples);
    s.get("sampler_steps", c.eval.sampler_steps);
  }
  root.get("checkpoint_path", c.checkpoint_path);
  root.get("manifest_path", c.manifest_path);
  validate(c);
  return c;
}

Json config_to_json(const TrainConfig& c) {
  Json j;
  j["data"] = {{"name", to_string(c.data.name)}, {"n_train", c.data.n_train},     {"n_heldout", c.data.n_heldout},
               {"labels", c.data.labels},        {"lift_dim", c.data.lift_dim},   {"lift_seed", c.data.lift_seed},
               {"seed", c.data.seed}};
  j["prior"] = prior_json(c.prior);
  j["schedule"] = {{"kind", to_string(c.schedule)}, {"sigma", c.sigma}};
  j["latent_dim"] = c.latent_dim;
  j["loss"] = {{"parameterization", to_string(c.loss.parameterization)},
               {"beta", c.loss.beta},
               {"timechange_exponent", c.loss.timechange_exponent},
               {"joint", c.loss.joint},
               {"t_clip", c.loss.t_clip},
               {"recon_weight", c.loss.recon_weight},
               {"eps_head_weight", c.loss.eps_head_weight},
               {"prior_reference_kl", c.loss.prior_reference_kl},
               {"gaussian_fast_path", c.loss.gaussian_fast_path},
               {"exact_elbo_weighting", c.loss.exact_elbo_weighting}};
  j["encoder"] = {{"kind", to_string(c.encoder.kind)},
                  {"hidden", c.encoder.hidden},
                  {"noise_mode", nn::to_string(c.encoder.noise_mode)},
                  {"noise_scale", c.encoder.noise_scale},
                  {"bound_latents", c.encoder.bound_latents},
                  {"norm_eps", c.encoder.norm_eps}};
  j["decoder"] = {{"kind", to_string(c.decoder.kind)}, {"hidden", c.decoder.hidden}};
  j["drift"] = {{"hidden", c.drift.hidden},
                {"time_embed_dim", c.drift.time_embed_dim},
                {"class_embed_dim", c.drift.class_embed_dim},
                {"label_drop", c.drift.label_drop},
                {"eps_head", c.drift.eps_head}};
  j["optimizer"] = {{"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"lr_schedule", to_string(c.lr_schedule)},
                    {"lr_floor", c.lr_floor}};
  j["ema_decay"] = c.ema_decay;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["obs_scale"] = c.obs_scale;
  j["bank_size"] = c.bank_size;
  j["log_every"] = c.log_every;
  j["eval"] = {{"every", c.eval.every}, {"samples", c.eval.samples}, {"sampler_steps", c.eval.sampler_steps}};
  j["checkpoint_path"] = c.checkpoint_path;
  j["manifest_path"] = c.manifest_path;
  return j;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (c.steps <= 0) fail("steps must be > 0");
  if (c.batch_size < 2) fail("batch_size must be >= 2");
  if (c.data.n_train < 2) fail("data.n_train must be >= 2");
  if (c.data.n_heldout < 0) fail("data.n_heldout must be >= 0");
  if (c.data.lift_dim < 0 || c.data.lift_dim == 1) fail("data.lift_dim must be 0 or >= 2");
  if (c.schedule != ScheduleKind::Linear) fail("training supports schedule.kind = linear only");
  if (!(c.sigma > 0.0)) fail("schedule.sigma must be positive");
  if (c.latent_dim < 1) fail("latent_dim must be >= 1");
  validate(c.loss);
  if (!(c.ema_decay >= 0.0 && c.ema_decay < 1.0)) fail("ema_decay must lie in [0, 1)");
  if (!(c.optimizer.lr > 0.0)) fail("optimizer.lr must be positive");
  if (!(c.optimizer.beta1 >= 0.0 && c.optimizer.beta1 < 1.0)) fail("optimizer.beta1 must lie in [0, 1)");
  if (!(c.optimizer.beta2 >= 0.0 && c.optimizer.beta2 < 1.0)) fail("optimizer.beta2 must lie in [0, 1)");
  if (!(c.optimizer.eps > 0.0)) fail("optimizer.eps must be positive");
  if (!(c.lr_floor >= 0.0 && c.lr_floor <= 1.0)) fail("optimizer.lr_floor must lie in [0, 1]");
  if (!(c.obs_scale >= 0.0)) fail("obs_scale must be >= 0 (0 = automatic)");
  if (c.bank_size < 1) fail("bank_size must be >= 1");
  if (c.log_every < 1) fail("log_every must be >= 1");
  if (c.eval.every < 0) fail("eval.every must be >= 0");
  if (c.eval.samples < 2) fail("eval.samples must be >= 2");
  if (c.eval.sampler_steps < 1) fail("eval.sampler_steps must be >= 1");
  if (!(c.drift.label_drop >= 0.0 && c.drift.label_drop <= 1.0)) fail("drift.label_drop must lie in [0, 1]");
  if (c.checkpoint_path.empty()) fail("checkpoint_path must not be empty");
  if ((c.loss.parameterization == Parameterization::Denoising ||
       c.loss.parameterization == Parameterization::NoisePred) &&
      !is_standard_normal(c.prior))
    fail("loss.parameterization " + std::string(to_string(c.loss.parameterization)) +
         " requires prior.kind = standard_normal");
  const int obs_dim = c.data.lift_dim == 0 ? 2 : c.data.lift_dim;
  if (c.encoder.kind == nn::CodecKind::Identity && obs_dim != c.latent_dim)
    fail("identity encoder needs latent_dim equal to the observation dimension");
}

nn::ModelSpec model_spec(const TrainConfig& c, int obs_dim) {
  nn::ModelSpec m;
  m.encoder = c.encoder;
  m.encoder.obs_dim = obs_dim;
  m.encoder.latent_dim = c.latent_dim;
  m.decoder = c.decoder;
  m.decoder.latent_dim = c.latent_dim;
  m.decoder.obs_dim = obs_dim;
  m.drift = c.drift;
  m.drift.latent_dim = c.latent_dim;
  m.drift.num_classes = c.data.labels ? num_classes(c.data.name) : 0;
  m.obs_scale = c.obs_scale > 0.0 ? c.obs_scale : 1.0;
  return m;
}

Schedule schedule_of(const TrainConfig& c) { return make_schedule(c.schedule, c.sigma); }

DatasetSpec dataset_spec(const TrainConfig& c, Eigen::Index n) {
  DatasetSpec d;
  d.name = c.data.name;
  d.n = n;
  d.labels = c.data.labels;
  d.lift_dim = c.data.lift_dim;
  d.lift_seed = c.data.lift_seed;
  return d;
}

}  // namespace lsi::app
