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

#include "app/commands.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "app/evaluate.hpp"
#include "app/svg.hpp"
#include "app/train.hpp"
#include "app/verify.hpp"
#include "lsi/eval.hpp"
#include "lsi/sampling.hpp"

namespace lsi::app {
namespace {

struct SampleArgs {
  std::string ckpt;
  Eigen::Index n = 1000;
  int steps = 300;
  double gamma = 0.0;
  std::string gamma_mode = "constant";
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot;
  std::optional<int> label;
  std::optional<double> grid_exponent;
  std::string score_source;
};

struct EvalArgs {
  std::string ckpt;
  std::string data;
  Eigen::Index n = 0;
  int steps = 300;
  std::uint64_t seed = 0;
  std::string out;
};

struct InvertArgs {
  std::string ckpt;
  std::string in;
  std::string out;
  int steps = 500;
  std::optional<double> grid_exponent;
};

void write_csv_file(const std::string& path, const Matrix& x, const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, x, labels);
  if (!out) throw std::runtime_error("error writing " + path);
}

Matrix read_csv_file(const std::string& path, std::vector<int>* labels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in, labels);
}

int cmd_train(const std::string& config, bool quiet, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = load_config(config);
  TrainOptions opts;
  opts.log = quiet ? nullptr : &err;
  const TrainResult r = train(cfg, opts);
  Json summary;
  summary["checkpoint"] = r.config.checkpoint_path;
  summary["steps"] = r.config.steps;
  summary["parameters"] = r.store.num_scalars();
  summary["final_loss"] = r.history.empty() ? 0.0 : r.history.back().total;
  summary["wall_clock_seconds"] = r.wall_seconds;
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const LoadedModel m = load_model(a.ckpt);
  SamplerConfig cfg = sampler_for(m.config, a.steps, a.grid_exponent);
  cfg.gamma = a.gamma;
  cfg.gamma_mode = gamma_mode_from_string(a.gamma_mode);
  cfg.guidance_lambda = a.lambda;
  cfg.seed = a.seed;
  if (!a.score_source.empty()) cfg.score_source = score_source_from_string(a.score_source);
  if (a.n < 0) throw std::invalid_argument("--n must be >= 0");
  std::vector<int> labels;
  if (a.label) {
    if (m.spec.drift.num_classes == 0) throw std::invalid_argument("--label given but the model is unconditional");
    labels.assign(static_cast<std::size_t>(a.n), *a.label);
  }
  const SampleRun run = sample(m.store, m.spec, m.schedule, m.config.prior, cfg, a.n, labels);
  write_csv_file(a.out, run.observations, labels.empty() ? nullptr : &labels);
  if (!a.plot.empty())
    write_svg_scatter(a.plot, project_2d(m.config, run.observations), labels.empty() ? nullptr : &labels,
                      "samples (" + std::to_string(a.n) + ", " + std::to_string(a.steps) + " steps)");
  out << Json({{"samples", a.n}, {"out", a.out}}).dump() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const LoadedModel m = load_model(a.ckpt);
  std::vector<int> data_labels;
  const Matrix data = read_csv_file(a.data, &data_labels);
  const MetricReport rep = evaluate_model(m, data, a.n, a.steps, a.seed).report;
  const std::string json = to_json(rep);
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << json << "\n";
  }
  out << json << "\n";
  return kExitOk;
}

int cmd_invert(const InvertArgs& a, std::ostream& out) {
  const LoadedModel m = load_model(a.ckpt);
  std::vector<int> labels;
  const Matrix x = read_csv_file(a.in, &labels);
  SamplerConfig cfg = inversion_config(m.config, a.steps, a.grid_exponent);
  if (m.spec.drift.num_classes == 0) labels.clear();
  const InversionRun run = invert(m.store, m.spec, m.schedule, cfg, x, labels);
  write_csv_file(a.out, run.z0, labels.empty() ? nullptr : &labels);
  out << Json({{"rows", x.rows()}, {"steps", a.steps}, {"relative_error", run.relative_error}}).dump() << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, const std::string& out_path, std::ostream& out) {
  const SuiteReport rep = run_suite(suite);
  const std::string json = rep.to_json().dump(2);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << json << "\n";
  }
  out << json << "\n";
  return rep.passed() ? kExitOk : kExitVerifyFailed;
}

int cmd_data(const std::string& config, const std::string& split, const std::string& path, std::ostream& out) {
  if (split != "train" && split != "heldout") throw std::invalid_argument("--split must be train or heldout");
  const TrainConfig cfg = load_config(config);
  const Splits s = make_splits(cfg);
  const Dataset& d = split == "train" ? s.train : s.heldout;
  write_csv_file(path, d.x, cfg.data.labels ? &d.labels : nullptr);
  out << Json({{"rows", d.x.rows()}, {"out", path}}).dump() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent stochastic interpolants: train, sample, evaluate and verify."};
  app.require_subcommand(1);

  std::string config;
  bool quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train encoder, decoder and latent drift from a JSON config");
  train_cmd->add_option("--config", config, "Config file (JSON)")->required();
  train_cmd->add_flag("--quiet", quiet, "Suppress progress lines");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Draw samples from a checkpoint");
  sample_cmd->add_option("--ckpt", sa.ckpt, "Checkpoint")->required();
  sample_cmd->add_option("--n", sa.n, "Number of samples")->capture_default_str();
  sample_cmd->add_option("--steps", sa.steps, "Sampler steps")->capture_default_str();
  sample_cmd->add_option("--gamma", sa.gamma, "Noise level gamma (0 = probability-flow ODE)")->capture_default_str();
  sample_cmd->add_option("--gamma-mode", sa.gamma_mode, "constant | decaying")->capture_default_str();
  sample_cmd->add_option("--lambda", sa.lambda, "Guidance weight")->capture_default_str();
  sample_cmd->add_option("--seed", sa.seed, "Seed")->capture_default_str();
  sample_cmd->add_option("--out", sa.out, "Output CSV")->required();
  sample_cmd->add_option("--plot", sa.plot, "Optional SVG scatter of the 2D projection");
  sample_cmd->add_option("--label", sa.label, "Class label for conditional models (-1 = null class)");
  sample_cmd->add_option("--grid-exponent", sa.grid_exponent, "Step grid exponent c");
  sample_cmd->add_option("--score-source", sa.score_source, "from_drift | from_eps_head");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Metric report against a data CSV");
  eval_cmd->add_option("--ckpt", ea.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--data", ea.data, "Reference data CSV")->required();
  eval_cmd->add_option("--n", ea.n, "Number of samples (0 = as many as data rows)")->capture_default_str();
  eval_cmd->add_option("--steps", ea.steps, "Sampler steps")->capture_default_str();
  eval_cmd->add_option("--seed", ea.seed, "Seed")->capture_default_str();
  eval_cmd->add_option("--out", ea.out, "Optional JSON output file");

  InvertArgs ia;
  auto* invert_cmd = app.add_subcommand("invert", "Map observations to prior noise with the reverse ODE");
  invert_cmd->add_option("--ckpt", ia.ckpt, "Checkpoint")->required();
  invert_cmd->add_option("--in", ia.in, "Observation CSV")->required();
  invert_cmd->add_option("--out", ia.out, "Output z0 CSV")->required();
  invert_cmd->add_option("--steps", ia.steps, "ODE steps")->capture_default_str();
  invert_cmd->add_option("--grid-exponent", ia.grid_exponent, "Step grid exponent c (default: at least 2)");

  std::string data_config, data_split = "heldout", data_out;
  auto* data_cmd = app.add_subcommand("data", "Write the training or held-out split of a config's dataset as CSV");
  data_cmd->add_option("--config", data_config, "Config file (JSON)")->required();
  data_cmd->add_option("--split", data_split, "train | heldout")->capture_default_str();
  data_cmd->add_option("--out", data_out, "Output CSV")->required();

  std::string suite;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "Run oracle suites");
  verify_cmd->add_option("--suite", suite, "schedules | bridge | objective | gradients | sampler | all")->required();
  verify_cmd->add_option("--out", verify_out, "Optional JSON report file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(config, quiet, out, err);
    if (*sample_cmd) return cmd_sample(sa, out);
    if (*eval_cmd) return cmd_eval(ea, out);
    if (*invert_cmd) return cmd_invert(ia, out);
    if (*verify_cmd) return cmd_verify(suite, verify_out, out);
    if (*data_cmd) return cmd_data(data_config, data_split, data_out, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace lsi::app
