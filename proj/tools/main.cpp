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

// fairperm: permutation tests of classifier fairness between two groups.
//
// Subcommands: test (one permutation test), sweep (equalized-odds threshold
// sweep), simulate (Monte-Carlo calibration studies), power (sample-size
// estimation).

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairperm/csv.hpp"
#include "fairperm/inference.hpp"
#include "fairperm/parallel.hpp"
#include "fairperm/report.hpp"
#include "fairperm/simlab.hpp"
#include "fairperm/version.hpp"

namespace {

using namespace fairperm;

struct IoFlags {
  std::string input;
  std::string group_col, label_col;
  std::string score_col, pred_col;
  std::string groups;  // "A,B"
  std::string output;
  std::string format = "json";
};

struct TestFlags {
  std::string metric = "fnr";
  double threshold = -1;
  bool has_threshold = false;
  std::string scheme = "pooled";
  int permutations = 1000;
  int bootstrap = 200;
  std::string studentize = "pooled";
  std::string scale = "sqrt-n";
  std::string tie_rule = "strict";
  double alpha = 0.05;
  std::string sided = "two";
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  std::string ci_method = "wilson";
  bool exhaustive = false;
  int threads = 0;
};

void add_io_flags(CLI::App* cmd, IoFlags& io, bool require_score) {
  cmd->add_option("--input", io.input, "input CSV path")->required();
  cmd->add_option("--group-col", io.group_col, "protected-group column")
      ->required();
  cmd->add_option("--label-col", io.label_col,
                  "binary label column (0/1 or -1/+1)")
      ->required();
  auto* score =
      cmd->add_option("--score-col", io.score_col, "model score column");
  cmd->add_option("--pred-col", io.pred_col, "thresholded prediction column");
  if (require_score) score->required();
  cmd->add_option("--groups", io.groups,
                  "the two group values to compare, e.g. M,F")
      ->required();
  cmd->add_option("--output", io.output,
                  "write the report here instead of stdout");
  cmd->add_option("--format", io.format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}));
}

DatasetSchema schema_from_flags(const IoFlags& io) {
  DatasetSchema schema;
  schema.group_column = io.group_col;
  schema.label_column = io.label_col;
  if (!io.score_col.empty()) schema.score_column = io.score_col;
  if (!io.pred_col.empty()) schema.prediction_column = io.pred_col;
  const auto comma = io.groups.find(',');
  if (comma == std::string::npos || comma == 0 ||
      comma + 1 == io.groups.size()) {
    throw CLI::ValidationError("--groups", "expected two values: A,B");
  }
  schema.group_a_value = io.groups.substr(0, comma);
  schema.group_b_value = io.groups.substr(comma + 1);
  return schema;
}

InputDigest digest_of(const std::string& path, const DatasetSchema& schema,
                      const LoadedDataset& loaded) {
  InputDigest digest;
  digest.path = path;
  digest.rows_total = loaded.rows_total;
  digest.group_a_value = schema.group_a_value;
  digest.group_b_value = schema.group_b_value;
  digest.n_a = loaded.sample.n_a();
  digest.n_b = loaded.sample.n_b();
  digest.n_a_pos = loaded.sample.n_a_pos();
  digest.n_b_pos = loaded.sample.n_b_pos();
  return digest;
}

MetricSpec metric_spec_from_flags(const TestFlags& flags) {
  MetricSpec spec;
  const auto kind = parse_metric_kind(flags.metric);
  if (!kind) throw CLI::ValidationError("--metric", "unknown metric");
  spec.kind = *kind;
  if (flags.has_threshold) spec.threshold = flags.threshold;
  if (flags.scale == "unscaled") {
    spec.scale = ScaleConvention::unscaled;
  } else if (flags.scale == "sqrt-n") {
    spec.scale = ScaleConvention::sqrt_n;
  } else if (flags.scale == "sqrt-na") {
    spec.scale = ScaleConvention::sqrt_n_a;
  } else {
    throw CLI::ValidationError("--scale", "unknown scale");
  }
  if (flags.studentize == "none") {
    spec.studentization = Studentization::none;
  } else if (flags.studentize == "closed-form") {
    spec.studentization = Studentization::closed_form;
  } else if (flags.studentize == "bootstrap") {
    spec.studentization = Studentization::bootstrap;
  } else if (flags.studentize == "pooled") {
    spec.studentization = Studentization::permutation_pooled;
  } else {
    throw CLI::ValidationError("--studentize", "unknown strategy");
  }
  spec.tie_rule =
      flags.tie_rule == "midrank" ? TieRule::midrank : TieRule::strict;
  return spec;
}

PermutationPlan plan_from_flags(const TestFlags& flags) {
  PermutationPlan plan;
  plan.scheme = flags.scheme == "within-outcome" ? Scheme::within_outcome
                                                 : Scheme::pooled;
  plan.n_trials = flags.permutations;
  plan.master_seed = flags.seed;
  return plan;
}

TestOptions options_from_flags(const TestFlags& flags) {
  TestOptions options;
  options.n_bootstrap = flags.bootstrap;
  options.alpha = flags.alpha;
  if (flags.sided == "two") {
    options.sided = Sidedness::two_sided;
  } else if (flags.sided == "upper") {
    options.sided = Sidedness::upper;
  } else if (flags.sided == "lower") {
    options.sided = Sidedness::lower;
  } else {
    throw CLI::ValidationError("--sided", "expected two, upper or lower");
  }
  options.ci_level = flags.ci_level;
  options.ci_method = flags.ci_method == "agresti-coull"
                          ? CiMethod::agresti_coull
                          : CiMethod::wilson;
  options.threads = flags.threads;
  options.exhaustive = flags.exhaustive;
  return options;
}

void append_test_config(ReportDocument& doc, const TestFlags& flags) {
  doc.config.emplace_back("metric", flags.metric);
  doc.config.emplace_back("threshold",
                          flags.has_threshold ? ConfigValue(flags.threshold)
                                              : ConfigValue(std::monostate{}));
  doc.config.emplace_back("scheme", flags.scheme);
  doc.config.emplace_back("permutations",
                          static_cast<std::int64_t>(flags.permutations));
  doc.config.emplace_back("bootstrap",
                          static_cast<std::int64_t>(flags.bootstrap));
  doc.config.emplace_back("studentize", flags.studentize);
  doc.config.emplace_back("scale", flags.scale);
  doc.config.emplace_back("tie_rule", flags.tie_rule);
  doc.config.emplace_back("alpha", flags.alpha);
  doc.config.emplace_back("sided", flags.sided);
  doc.config.emplace_back("seed", static_cast<std::int64_t>(flags.seed));
  doc.config.emplace_back("ci_level", flags.ci_level);
  doc.config.emplace_back("ci_method", flags.ci_method);
  doc.config.emplace_back("exhaustive", flags.exhaustive);
}

int emit(const ReportDocument& doc, const IoFlags& io) {
  const std::string text =
      io.format == "tsv" ? render_tsv(doc) : render_json(doc);
  if (io.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(io.output);
    if (!out) {
      std::cerr << "fairperm: cannot write '" << io.output << "'\n";
      return 1;
    }
    out << text;
  }
  return 0;
}

double wall_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<double> parse_tau_grid(const std::string& grid_spec) {
  double start = 0, stop = 1, step = 0.05;
  const auto c1 = grid_spec.find(':');
  const auto c2 = grid_spec.rfind(':');
  if (c1 == std::string::npos || c2 == c1) {
    throw CLI::ValidationError("--tau-grid", "expected start:stop:step");
  }
  try {
    start = std::stod(grid_spec.substr(0, c1));
    stop = std::stod(grid_spec.substr(c1 + 1, c2 - c1 - 1));
    step = std::stod(grid_spec.substr(c2 + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--tau-grid", "expected start:stop:step");
  }
  if (step <= 0 || stop < start) {
    throw CLI::ValidationError("--tau-grid",
                               "need step > 0 and stop >= start");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double tau = start + k * step;
    if (tau > stop + 1e-12) break;
    grid.push_back(std::min(tau, stop));
  }
  return grid;
}

int run_test_command(const IoFlags& io, const TestFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const DatasetSchema schema = schema_from_flags(io);
  const LoadedDataset loaded = load_csv(io.input, schema);

  const MetricSpec spec = metric_spec_from_flags(flags);
  const PermutationPlan plan = plan_from_flags(flags);
  const TestOptions options = options_from_flags(flags);

  const TestReport report =
      permutation_test(loaded.sample, spec, plan, options);

  ReportDocument doc;
  doc.command = "test";
  doc.input = digest_of(io.input, schema, loaded);
  append_test_config(doc, flags);
  doc.payload = report;
  doc.threads = static_cast<int>(resolve_threads(flags.threads));
  doc.wall_ms = wall_ms_since(start);
  return emit(doc, io);
}

int run_sweep_command(const IoFlags& io, const TestFlags& flags,
                      const std::string& grid_spec) {
  const auto start = std::chrono::steady_clock::now();
  const DatasetSchema schema = schema_from_flags(io);
  if (!schema.score_column) {
    throw CLI::ValidationError("--score-col", "sweeps need a score column");
  }
  const LoadedDataset loaded = load_csv(io.input, schema);
  const std::vector<double> grid = parse_tau_grid(grid_spec);

  MetricSpec spec = metric_spec_from_flags(flags);
  const PermutationPlan plan = plan_from_flags(flags);
  const TestOptions options = options_from_flags(flags);

  SweepResult result;
  spec.kind = MetricKind::fpr;
  const auto fpr_rows =
      min_detectable_difference(loaded.sample, spec, grid, plan, options);
  spec.kind = MetricKind::recall;
  PermutationPlan recall_plan = plan;
  recall_plan.master_seed =
      derive_seed(plan.master_seed, 1, StreamPurpose::test_seed);
  const auto recall_rows = min_detectable_difference(loaded.sample, spec, grid,
                                                     recall_plan, options);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.rows.push_back({grid[g], fpr_rows[g], recall_rows[g]});
  }
  result.min_detected_fpr = min_detected_difference(fpr_rows);
  result.min_detected_recall = min_detected_difference(recall_rows);

  ReportDocument doc;
  doc.command = "sweep";
  doc.input = digest_of(io.input, schema, loaded);
  append_test_config(doc, flags);
  doc.config.emplace_back("tau_grid", grid_spec);
  doc.payload = result;
  doc.threads = static_cast<int>(resolve_threads(flags.threads));
  doc.wall_ms = wall_ms_since(start);
  return emit(doc, io);
}

int run_simulate_command(const std::string& scenario_flag,
                         const std::string& procedure_flag,
                         SimScenario scenario, const IoFlags& io) {
  const auto start = std::chrono::steady_clock::now();
  if (scenario_flag == "uncorrelated") {
    scenario.id = ScenarioId::uncorrelated_heteroskedastic;
  } else if (scenario_flag == "dependent-exp") {
    scenario.id = ScenarioId::dependent_uncorrelated_exp;
  } else if (scenario_flag == "fnr-imbalanced") {
    scenario.id = ScenarioId::fnr_imbalanced;
  } else if (scenario_flag == "strong-null") {
    scenario.id = ScenarioId::strong_null_generic;
  } else {
    throw CLI::ValidationError("--scenario", "unknown scenario");
  }
  Procedure procedure;
  if (procedure_flag == "studentized") {
    procedure = Procedure::studentized;
  } else if (procedure_flag == "unstudentized") {
    procedure = Procedure::unstudentized;
  } else if (procedure_flag == "basic-bootstrap") {
    procedure = Procedure::basic_bootstrap;
  } else {
    throw CLI::ValidationError("--procedure", "unknown procedure");
  }

  const StudyResult result = run_rejection_study(scenario, procedure);

  ReportDocument doc;
  doc.command = "simulate";
  doc.config.emplace_back("scenario", scenario_flag);
  doc.config.emplace_back("procedure", procedure_flag);
  doc.config.emplace_back("sims", static_cast<std::int64_t>(scenario.n_sims));
  doc.config.emplace_back("permutations",
                          static_cast<std::int64_t>(scenario.n_trials));
  doc.config.emplace_back("bootstrap",
                          static_cast<std::int64_t>(scenario.n_bootstrap));
  doc.config.emplace_back("alpha", scenario.alpha);
  doc.config.emplace_back("seed",
                          static_cast<std::int64_t>(scenario.master_seed));
  doc.config.emplace_back("n_points",
                          static_cast<std::int64_t>(scenario.n_points));
  doc.config.emplace_back("n_a", static_cast<std::int64_t>(scenario.n_a));
  doc.config.emplace_back("n_b", static_cast<std::int64_t>(scenario.n_b));
  doc.config.emplace_back("p_pos_a", scenario.p_plus_a);
  doc.config.emplace_back("p_pos_b", scenario.p_plus_b);
  doc.config.emplace_back("tpr", scenario.tpr);
  doc.config.emplace_back("tnr", scenario.tnr);
  doc.payload = result;
  doc.threads = static_cast<int>(resolve_threads(scenario.threads));
  doc.wall_ms = wall_ms_since(start);
  return emit(doc, io);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"permutation tests of classifier fairness between two groups"};
  app.set_version_flag("--version", std::string("fairperm ") + kVersion);
  app.require_subcommand(1);

  // ---- test ----
  IoFlags test_io;
  TestFlags test_flags;
  CLI::App* test_cmd =
      app.add_subcommand("test", "run one permutation test on a CSV dataset");
  add_io_flags(test_cmd, test_io, false);
  test_cmd->add_option("--metric", test_flags.metric,
                       "mean|fnr|fpr|recall|tnr|precision|accuracy|auc");
  auto* thr_opt = test_cmd->add_option("--threshold", test_flags.threshold,
                                       "classify positive when score > tau");
  test_cmd->add_option("--scheme", test_flags.scheme, "pooled|within-outcome")
      ->check(CLI::IsMember({"pooled", "within-outcome"}));
  test_cmd->add_option("--permutations", test_flags.permutations,
                       "number of permutation trials");
  test_cmd->add_option("--bootstrap", test_flags.bootstrap,
                       "bootstrap trials for variance estimation");
  test_cmd->add_option("--studentize", test_flags.studentize,
                       "closed-form|bootstrap|pooled|none");
  test_cmd->add_option("--scale", test_flags.scale, "unscaled|sqrt-n|sqrt-na");
  test_cmd->add_option("--tie-rule", test_flags.tie_rule, "strict|midrank");
  test_cmd->add_option("--alpha", test_flags.alpha, "significance level");
  test_cmd->add_option("--sided", test_flags.sided, "two|upper|lower");
  test_cmd->add_option("--seed", test_flags.seed, "master seed (required)")
      ->required();
  test_cmd->add_option("--ci-level", test_flags.ci_level,
                       "p-value CI confidence level");
  test_cmd->add_option("--ci-method", test_flags.ci_method,
                       "wilson|agresti-coull");
  test_cmd->add_flag("--exhaustive", test_flags.exhaustive,
                     "enumerate every split (small n)");
  test_cmd->add_option("--threads", test_flags.threads,
                       "worker threads (0 = all cores)");

  // ---- sweep ----
  IoFlags sweep_io;
  TestFlags sweep_flags;
  std::string tau_grid = "0:1:0.05";
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "equalized-odds threshold sweep over FPR and Recall");
  add_io_flags(sweep_cmd, sweep_io, true);
  sweep_cmd->add_option("--tau-grid", tau_grid, "start:stop:step");
  sweep_cmd->add_option("--permutations", sweep_flags.permutations,
                        "permutation trials per grid point");
  sweep_cmd->add_option("--bootstrap", sweep_flags.bootstrap,
                        "bootstrap trials for variance estimation");
  sweep_cmd->add_option("--studentize", sweep_flags.studentize,
                        "closed-form|bootstrap|pooled|none");
  sweep_cmd->add_option("--scheme", sweep_flags.scheme,
                        "pooled|within-outcome")
      ->check(CLI::IsMember({"pooled", "within-outcome"}));
  sweep_cmd->add_option("--alpha", sweep_flags.alpha, "significance level");
  sweep_cmd->add_option("--seed", sweep_flags.seed, "master seed (required)")
      ->required();
  sweep_cmd->add_option("--threads", sweep_flags.threads,
                        "worker threads (0 = all cores)");

  // ---- simulate ----
  IoFlags sim_io;
  std::string scenario_flag = "fnr-imbalanced";
  std::string procedure_flag = "studentized";
  SimScenario scenario;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Monte-Carlo null rejection and calibration studies");
  sim_cmd->add_option("--scenario", scenario_flag,
                      "uncorrelated|dependent-exp|fnr-imbalanced|strong-null")
      ->required();
  sim_cmd->add_option("--procedure", procedure_flag,
                      "studentized|unstudentized|basic-bootstrap");
  sim_cmd->add_option("--sims", scenario.n_sims,
                      "number of simulated datasets");
  sim_cmd->add_option("--permutations", scenario.n_trials,
                      "permutation trials per test");
  sim_cmd->add_option("--bootstrap", scenario.n_bootstrap,
                      "bootstrap trials per variance estimate");
  sim_cmd->add_option("--alpha", scenario.alpha, "significance level");
  sim_cmd->add_option("--seed", scenario.master_seed, "master seed (required)")
      ->required();
  sim_cmd->add_option("--n", scenario.n_points,
                      "points per dataset (correlation scenarios)");
  sim_cmd->add_option("--n-a", scenario.n_a, "group A size");
  sim_cmd->add_option("--n-b", scenario.n_b, "group B size");
  sim_cmd->add_option("--p-pos-a", scenario.p_plus_a,
                      "P(positive label) in group A");
  sim_cmd->add_option("--p-pos-b", scenario.p_plus_b,
                      "P(positive label) in group B");
  sim_cmd->add_option("--tpr", scenario.tpr, "classifier true positive rate");
  sim_cmd->add_option("--tnr", scenario.tnr, "classifier true negative rate");
  sim_cmd->add_option("--threads", scenario.threads,
                      "worker threads (0 = all cores)");
  sim_cmd->add_option("--output", sim_io.output, "write the report here");
  sim_cmd->add_option("--format", sim_io.format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}));

  // ---- power ----
  IoFlags power_io;
  TestFlags power_flags;
  double target_difference = 0.0;
  double variance_flag = -1.0;
  CLI::App* power_cmd = app.add_subcommand(
      "power", "sample size needed to detect a target difference");
  power_cmd->add_option("--target-difference", target_difference,
                        "smallest difference to detect")
      ->required();
  power_cmd->add_option("--metric", power_flags.metric,
                        "metric whose difference is tested");
  auto* var_opt = power_cmd->add_option("--variance", variance_flag,
                                        "per-unit variance (skips --input)");
  auto* input_opt = power_cmd->add_option("--input", power_io.input,
                                          "estimate variance from this CSV");
  power_cmd->add_option("--group-col", power_io.group_col, "group column");
  power_cmd->add_option("--label-col", power_io.label_col, "label column");
  power_cmd->add_option("--score-col", power_io.score_col, "score column");
  power_cmd->add_option("--pred-col", power_io.pred_col, "prediction column");
  power_cmd->add_option("--groups", power_io.groups, "two group values A,B");
  auto* power_thr = power_cmd->add_option(
      "--threshold", power_flags.threshold, "classification threshold");
  power_cmd->add_option("--output", power_io.output, "write the report here");
  power_cmd->add_option("--format", power_io.format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (test_cmd->parsed()) {
      test_flags.has_threshold = thr_opt->count() > 0;
      return run_test_command(test_io, test_flags);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_command(sweep_io, sweep_flags, tau_grid);
    }
    if (sim_cmd->parsed()) {
      return run_simulate_command(scenario_flag, procedure_flag, scenario,
                                  sim_io);
    }
    if (power_cmd->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      const auto kind = parse_metric_kind(power_flags.metric);
      if (!kind) throw CLI::ValidationError("--metric", "unknown metric");

      PowerResult result;
      result.target_difference = target_difference;
      ReportDocument doc;
      doc.command = "power";
      if (var_opt->count() > 0) {
        result.per_unit_variance = variance_flag;
      } else if (input_opt->count() > 0) {
        const DatasetSchema schema = schema_from_flags(power_io);
        const LoadedDataset loaded = load_csv(power_io.input, schema);
        const std::optional<double> tau =
            power_thr->count() > 0 ? std::optional(power_flags.threshold)
                                   : std::nullopt;
        result.per_unit_variance =
            per_unit_variance_from_data(loaded.sample, *kind, tau);
        doc.input = digest_of(power_io.input, schema, loaded);
      } else {
        std::cerr << "fairperm power: pass either --variance or --input\n";
        return 2;
      }
      result.n_per_group =
          sample_size_estimate(target_difference, result.per_unit_variance);
      result.note =
          "normal approximation: per-group n with 2*sd(T) <= target at "
          "equal group sizes";
      doc.config.emplace_back("metric", power_flags.metric);
      doc.config.emplace_back("target_difference", target_difference);
      doc.payload = result;
      doc.threads = 1;
      doc.wall_ms = wall_ms_since(start);
      return emit(doc, power_io);
    }
  } catch (const Error& e) {
    std::cerr << "fairperm: " << e.what() << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "fairperm: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
