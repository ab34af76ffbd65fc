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

// Oracle suites behind `lsi verify` and the acceptance gate. Each check
// compares an implementation against a closed form or a Monte-Carlo oracle and
// reports the worst observed error next to its tolerance.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "lsi/nn/model.hpp"

namespace lsi::app {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  Json metrics = Json::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
  Json to_json() const;
};

/// Runs fn, timing it and turning exceptions into failed checks.
CheckResult run_check(const std::string& name, const std::function<CheckResult()>& fn);

CheckResult check_schedule_algebra(int n_times, std::uint64_t seed);
/// Euler-Maruyama bridge paths vs the analytic conditional at t in {1/4, 1/2, 3/4}.
CheckResult check_bridge_oracle(ScheduleKind kind, int n_paths, int n_steps, std::uint64_t seed);
CheckResult check_interpolant_moments(int n_draws, std::uint64_t seed);
CheckResult check_time_change(const std::vector<double>& exponents, int n_draws, std::uint64_t seed);
/// (a) hat <-> h round trip; (b) each parameterization's own Bayes optimum on
/// the linear-Gaussian problem maps to the same drift.
CheckResult check_parameterizations(int n_random, std::uint64_t seed);
CheckResult check_objective_reduction(std::uint64_t seed);
CheckResult check_joint_stop_gradient(std::uint64_t seed);
/// Composed loss gradient vs central differences along random directions.
CheckResult check_gradients(int n_directions, std::uint64_t seed);
CheckResult check_sampler_marginals(const std::vector<double>& gammas, Eigen::Index n_samples, int n_steps,
                                    std::uint64_t seed);
CheckResult check_score_agreement(int n_points, std::uint64_t seed);
/// lambda = 0 / -1 against independently built conditional / unconditional fields.
CheckResult check_cfg_identities(Eigen::Index n_samples, int n_steps, std::uint64_t seed);
CheckResult check_inversion_closed_form(Eigen::Index n_samples, int n_steps, std::uint64_t seed);

/// A <= 100 parameter model used by the gradient check.
nn::ModelSpec tiny_model_spec();

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const std::string& name);

}  // namespace lsi::app
