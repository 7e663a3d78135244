/*
 * Copyright 2026 Fairperm Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "fairperm/data.hpp"
#include "fairperm/inference.hpp"
#include "fairperm/rng.hpp"

namespace fairperm {

enum class ScenarioId {
  uncorrelated_heteroskedastic,
  dependent_uncorrelated_exp,
  fnr_imbalanced,
  strong_null_generic,
};

enum class Procedure { studentized, unstudentized, basic_bootstrap };

const char* scenario_name(ScenarioId id);
const char* procedure_name(Procedure p);

struct SimScenario {
  ScenarioId id = ScenarioId::fnr_imbalanced;
  // Correlation scenarios: points per dataset.
  int n_points = 2000;
  // Grouped scenarios.
  int n_a = 200;
  int n_b = 200;
  double p_plus_a = 0.8;
  double p_plus_b = 0.2;
  double tpr = 0.9;
  double tnr = 0.9;
  // Study configuration.
  int n_sims = 2000;
  int n_trials = 500;
  int n_bootstrap = 200;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  int threads = 0;
};

/// Rejection-rate study output: the estimated null rejection probability
/// with its Wilson interval, the decile histogram of p-values, and rates at
/// the standard levels.
struct StudyResult {
  double rejection_probability = 0.0;
  std::pair<double, double> rejection_ci = {0.0, 1.0};
  std::array<double, 10> p_histogram{};  // mass per decile of (0, 1]
  std::array<std::pair<double, double>, 3> alpha_table{
      std::pair<double, double>{0.01, 0.0},
      std::pair<double, double>{0.05, 0.0},
      std::pair<double, double>{0.10, 0.0}};
  std::uint64_t n_sims_completed = 0;
  std::uint64_t n_errored = 0;
  std::vector<double> p_values;  // one per completed simulation
};

/// Protected attribute x ~ U(1e-5, 1); model error z / x^2 with z standard
/// normal. Uncorrelated with x but strongly dependent on it.
std::vector<std::pair<double, double>> gen_uncorrelated(int n,
                                                        RngStream& stream);

/// x ~ 1 + Exp(1) with the same error shape; dependent and uncorrelated.
std::vector<std::pair<double, double>> gen_dependent_exp(int n,
                                                         RngStream& stream);

/// Two groups with different positive-label rates but a classifier that is
/// fair by construction (equal TPR and TNR in both groups). Scores equal
/// the 0/1 decision.
GroupedSample gen_fnr_scenario(int n_a, int n_b, double p_plus_a,
                               double p_plus_b, double tpr, double tnr,
                               RngStream& stream);

/// Both groups generated identically: standard-normal scores, balanced
/// labels, decisions flipped at rate 0.1. The sharp null holds exactly.
GroupedSample gen_strong_null(int n_a, int n_b, RngStream& stream);

/// Synthetic scored data whose score distribution differs smoothly between
/// groups (latent normal shifted by `shift` for group A), for threshold
/// sweeps and sample-size studies.
GroupedSample gen_scored_shift(int n_a, int n_b, double shift,
                               RngStream& stream);

/// Runs n_sims simulated datasets through the configured test procedure
/// and aggregates rejection rates at `alpha`, the per-level table, and the
/// p-value histogram. Deterministic given the scenario's master seed.
StudyResult run_rejection_study(const SimScenario& scenario,
                                Procedure procedure);

/// Runs several procedures against the same simulated datasets for
/// side-by-side calibration comparisons.
std::map<Procedure, StudyResult> run_calibration_study(
    const SimScenario& scenario, const std::vector<Procedure>& procedures);

}  // namespace fairperm
