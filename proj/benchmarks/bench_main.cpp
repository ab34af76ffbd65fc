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


// Micro benchmarks for the hot paths: one training step, one sampler step,
// the bridge simulator and the energy distance.

#include <benchmark/benchmark.h>

#include <vector>

#include "lsi/bridge.hpp"
#include "lsi/data.hpp"
#include "lsi/eval.hpp"
#include "lsi/nn/optim.hpp"
#include "lsi/objective.hpp"
#include "lsi/sampling.hpp"

namespace {

using namespace lsi;

nn::ModelSpec default_model() {
  nn::ModelSpec spec;
  spec.obs_scale = 0.2;
  return spec;
}

static void BM_TrainStep(benchmark::State& state) {
  const nn::ModelSpec spec = default_model();
  nn::ParameterStore store;
  Rng rng(1);
  nn::init_model(store, spec, rng);
  DatasetSpec ds;
  ds.n = state.range(0);
  const Dataset data = make_dataset(ds, rng);
  const Schedule s = make_schedule(ScheduleKind::Linear);
  nn::AdamW opt({.lr = 1e-3, .beta1 = 0.9, .beta2 = 0.99, .eps = 1e-12});
  LossConfig cfg;
  for (auto _ : state) {
    store.zero_grad();
    nn::Tape tape(&store);
    const LossBreakdown l = lsi_loss(tape, data.x, {}, spec, PriorSpec{}, s, cfg, rng);
    tape.backward(l.objective);
    opt.step(store);
    nn::ema_update(store, 0.999);
    benchmark::DoNotOptimize(l.total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_SamplerStep(benchmark::State& state) {
  const nn::ModelSpec spec = default_model();
  nn::ParameterStore store;
  Rng rng(2);
  nn::init_model(store, spec, rng);
  const Schedule s = make_schedule(ScheduleKind::Linear);
  SamplerConfig cfg;
  cfg.gamma = 0.5;
  const FieldFn field = model_field(store, spec, s, cfg);
  Matrix z = rng.normal_matrix(state.range(0), 2);
  std::vector<Rng> rngs;
  for (Eigen::Index i = 0; i < z.rows(); ++i) rngs.push_back(Rng(3).split(static_cast<std::uint64_t>(i)));
  for (auto _ : state) {
    Matrix w = z;
    sampler_step(s, w, 0.4, 1.0 / 300, cfg, field, {}, rngs);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplerStep)->Arg(512)->Unit(benchmark::kMicrosecond);

static void BM_ExactIntegrate(benchmark::State& state) {
  const Schedule s = make_schedule(ScheduleKind::Linear);
  SamplerConfig cfg;
  cfg.n_steps = 100;
  cfg.threads = 1;
  const Vec m = Vec::Constant(2, 1.0), var = Vec::Constant(2, 0.5);
  const FieldFn field = exact_gaussian_field(m, var, s, cfg);
  Rng rng(4);
  const Matrix z0 = rng.normal_matrix(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(s, z0, cfg, field).z1.data());
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.n_steps);
}
BENCHMARK(BM_ExactIntegrate)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_SimulateBridge(benchmark::State& state) {
  const Schedule s = make_schedule(ScheduleKind::Linear);
  Rng rng(5);
  const Vec z0 = Vec::Zero(2), z1 = Vec::Ones(2);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_bridge(s, z0, z1, static_cast<int>(state.range(0)), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateBridge)->Arg(2000);

static void BM_EnergyDistance(benchmark::State& state) {
  Rng rng(6);
  const Matrix a = rng.normal_matrix(state.range(0), 8), b = rng.normal_matrix(state.range(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(energy_distance(a, b));
}
BENCHMARK(BM_EnergyDistance)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
