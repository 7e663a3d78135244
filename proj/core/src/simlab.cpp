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

#include "fairperm/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "fairperm/parallel.hpp"
#include "fairperm/resampling.hpp"

namespace fairperm {

const char* scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::uncorrelated_heteroskedastic: return "uncorrelated";
    case ScenarioId::dependent_uncorrelated_exp: return "dependent-exp";
    case ScenarioId::fnr_imbalanced: return "fnr-imbalanced";
    case ScenarioId::strong_null_generic: return "strong-null";
  }
  return "unknown";
}

const char* procedure_name(Procedure p) {
  switch (p) {
    case Procedure::studentized: return "studentized";
    case Procedure::unstudentized: return "unstudentized";
    case Procedure::basic_bootstrap: return "basic-bootstrap";
  }
  return "unknown";
}

std::vector<std::pair<double, double>> gen_uncorrelated(int n,
                                                        RngStream& stream) {
  if (n < 3) raise(ErrorCode::invalid_argument, "need n >= 3 points");
  std::vector<std::pair<double, double>> pairs(static_cast<std::size_t>(n));
  for (auto& [x, e] : pairs) {
    x = stream.uniform(1e-5, 1.0);
    e = stream.normal() / (x * x);
  }
  return pairs;
}

std::vector<std::pair<double, double>> gen_dependent_exp(int n,
                                                         RngStream& stream) {
  if (n < 3) raise(ErrorCode::invalid_argument, "need n >= 3 points");
  std::vector<std::pair<double, double>> pairs(static_cast<std::size_t>(n));
  for (auto& [x, e] : pairs) {
    x = 1.0 + stream.exponential();
    e = stream.normal() / (x * x);
  }
  return pairs;
}

namespace {

ScoredRecord flip_record(Group group, bool label_positive, double tpr,
                         double tnr, RngStream& stream) {
  ScoredRecord r;
  r.group = group;
  r.label_positive = label_positive;
  const bool correct = stream.bernoulli(label_positive ? tpr : tnr);
  r.predicted_positive = label_positive == correct;
  r.score = r.predicted_positive ? 1.0 : 0.0;
  return r;
}

}  // namespace

GroupedSample gen_fnr_scenario(int n_a, int n_b, double p_plus_a,
                               double p_plus_b, double tpr, double tnr,
                               RngStream& stream) {
  std::vector<ScoredRecord> records;
  records.reserve(static_cast<std::size_t>(n_a + n_b));
  for (int i = 0; i < n_a; ++i) {
    records.push_back(flip_record(Group::a, stream.bernoulli(p_plus_a), tpr,
                                  tnr, stream));
  }
  for (int i = 0; i < n_b; ++i) {
    records.push_back(flip_record(Group::b, stream.bernoulli(p_plus_b), tpr,
                                  tnr, stream));
  }
  return GroupedSample::from_records(std::move(records));
}

GroupedSample gen_strong_null(int n_a, int n_b, RngStream& stream) {
  std::vector<ScoredRecord> records;
  records.reserve(static_cast<std::size_t>(n_a + n_b));
  for (int i = 0; i < n_a + n_b; ++i) {
    ScoredRecord r = flip_record(i < n_a ? Group::a : Group::b,
                                 stream.bernoulli(0.5), 0.9, 0.9, stream);
    r.score = stream.normal();
    records.push_back(r);
  }
  return GroupedSample::from_records(std::move(records));
}

GroupedSample gen_scored_shift(int n_a, int n_b, double shift,
                               RngStream& stream) {
  const auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<ScoredRecord> records;
  records.reserve(static_cast<std::size_t>(n_a + n_b));
  for (int i = 0; i < n_a + n_b; ++i) {
    ScoredRecord r;
    r.group = i < n_a ? Group::a : Group::b;
    r.label_positive = stream.bernoulli(0.5);
    // Positives score higher on average; group A's positives get an extra
    // shift so recall/FPR curves separate smoothly in the mid range.
    const double latent = stream.normal() + (r.label_positive ? 1.0 : -1.0) +
                          (r.group == Group::a ? shift : 0.0);
    r.score = sigmoid(latent);
    r.predicted_positive = r.score > 0.5;
    records.push_back(r);
  }
  return GroupedSample::from_records(std::move(records));
}

namespace {

bool is_correlation_scenario(ScenarioId id) {
  return id == ScenarioId::uncorrelated_heteroskedastic ||
         id == ScenarioId::dependent_uncorrelated_exp;
}

// One simulated dataset -> one p-value.
double simulate_one(const SimScenario& scenario, Procedure procedure,
                    std::uint64_t sim_index) {
  RngStream data_stream =
      rng_stream(scenario.master_seed, sim_index, StreamPurpose::dataset);
  const std::uint64_t test_seed =
      derive_seed(scenario.master_seed, sim_index, StreamPurpose::test_seed);

  TestOptions options;
  options.n_bootstrap = scenario.n_bootstrap;
  options.alpha = scenario.alpha;
  options.threads = 1;  // parallelism lives at the simulation level

  if (is_correlation_scenario(scenario.id)) {
    if (procedure == Procedure::basic_bootstrap) {
      raise(ErrorCode::invalid_argument,
            "basic bootstrap applies to grouped scenarios only");
    }
    const auto pairs =
        scenario.id == ScenarioId::uncorrelated_heteroskedastic
            ? gen_uncorrelated(scenario.n_points, data_stream)
            : gen_dependent_exp(scenario.n_points, data_stream);
    // Per-trial bootstrap studentization: under the designed
    // heteroskedasticity the permutation distribution of r is far from
    // normal, so the pooled shortcut miscalibrates here.
    return association_test(pairs,
                            procedure == Procedure::studentized
                                ? Studentization::bootstrap
                                : Studentization::none,
                            scenario.n_trials, test_seed, options)
        .p_value;
  }

  GroupedSample data =
      scenario.id == ScenarioId::fnr_imbalanced
          ? gen_fnr_scenario(scenario.n_a, scenario.n_b, scenario.p_plus_a,
                             scenario.p_plus_b, scenario.tpr, scenario.tnr,
                             data_stream)
          : gen_strong_null(scenario.n_a, scenario.n_b, data_stream);

  MetricSpec spec;
  spec.kind = scenario.id == ScenarioId::fnr_imbalanced
                  ? MetricKind::fnr
                  : MetricKind::mean_of_score;
  spec.scale = ScaleConvention::sqrt_n;

  if (procedure == Procedure::basic_bootstrap) {
    spec.studentization = Studentization::none;
    return basic_bootstrap_distribution(data, spec, scenario.n_trials,
                                        test_seed)
        .p_value;
  }

  spec.studentization = procedure == Procedure::studentized
                            ? Studentization::closed_form
                            : Studentization::none;
  PermutationPlan plan;
  plan.scheme = Scheme::pooled;
  plan.n_trials = scenario.n_trials;
  plan.master_seed = test_seed;
  return permutation_test(data, spec, plan, options).p_value;
}

StudyResult summarize(const std::vector<double>& p_values,
                      std::uint64_t n_errored, double alpha) {
  StudyResult result;
  result.p_values = p_values;
  result.n_sims_completed = p_values.size();
  result.n_errored = n_errored;
  if (p_values.empty()) return result;

  std::uint64_t rejected = 0;
  std::array<std::uint64_t, 3> level_counts{};
  const std::array<double, 3> levels{0.01, 0.05, 0.10};
  std::array<std::uint64_t, 10> bins{};
  for (const double p : p_values) {
    if (p <= alpha) ++rejected;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (p <= levels[k]) ++level_counts[k];
    }
    const int bin = std::clamp(
        static_cast<int>(std::ceil(p * 10.0 - 1e-9)) - 1, 0, 9);
    ++bins[static_cast<std::size_t>(bin)];
  }
  const double n = static_cast<double>(p_values.size());
  result.rejection_probability = static_cast<double>(rejected) / n;
  result.rejection_ci =
      pvalue_confidence_interval(rejected, p_values.size(), 0.95);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    result.alpha_table[k] = {levels[k],
                             static_cast<double>(level_counts[k]) / n};
  }
  for (std::size_t k = 0; k < 10; ++k) {
    result.p_histogram[k] = static_cast<double>(bins[k]) / n;
  }
  return result;
}

}  // namespace

std::map<Procedure, StudyResult> run_calibration_study(
    const SimScenario& scenario, const std::vector<Procedure>& procedures) {
  if (scenario.n_sims < 1) {
    raise(ErrorCode::invalid_argument, "n_sims must be >= 1");
  }
  const std::size_t n_sims = static_cast<std::size_t>(scenario.n_sims);
  const std::size_t n_procs = procedures.size();

  // p_value slot per (simulation, procedure); NaN marks an errored run.
  std::vector<double> slots(n_sims * n_procs,
                            std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_sims, scenario.threads, [&](std::size_t s) {
    for (std::size_t k = 0; k < n_procs; ++k) {
      try {
        slots[s * n_procs + k] = simulate_one(scenario, procedures[k], s);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_argument ||
            e.code() == ErrorCode::invalid_scheme) {
          throw;  // misconfiguration, not a per-dataset failure
        }
        // leave NaN: counted as errored
      }
    }
  });

  std::map<Procedure, StudyResult> results;
  for (std::size_t k = 0; k < n_procs; ++k) {
    std::vector<double> p_values;
    p_values.reserve(n_sims);
    std::uint64_t errored = 0;
    for (std::size_t s = 0; s < n_sims; ++s) {
      const double p = slots[s * n_procs + k];
      if (std::isnan(p)) {
        ++errored;
      } else {
        p_values.push_back(p);
      }
    }
    results[procedures[k]] = summarize(p_values, errored, scenario.alpha);
  }
  return results;
}

StudyResult run_rejection_study(const SimScenario& scenario,
                                Procedure procedure) {
  return run_calibration_study(scenario, {procedure}).at(procedure);
}

}  // namespace fairperm
