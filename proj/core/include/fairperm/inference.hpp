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

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairperm/data.hpp"
#include "fairperm/metrics.hpp"
#include "fairperm/resampling.hpp"
#include "fairperm/variance.hpp"

namespace fairperm {

enum class Sidedness { two_sided, upper, lower };
enum class Direction { a_greater, b_greater, undetermined };
enum class CiMethod { wilson, agresti_coull };

const char* sidedness_name(Sidedness s);
const char* direction_name(Direction d);

struct TestOptions {
  int n_bootstrap = 200;
  double alpha = 0.05;
  Sidedness sided = Sidedness::two_sided;
  double ci_level = 0.95;
  CiMethod ci_method = CiMethod::wilson;
  int threads = 0;  // 0 = all hardware threads
  bool exhaustive = false;
  std::uint64_t exhaustive_cap = 200000;
  int redraw_cap_factor = 100;
};

struct TestDiagnostics {
  double perm_mean = 0.0;      // mean of the trial statistics T_i
  double perm_variance = 0.0;  // their sample variance (empirical spread of
                               // the permutation distribution)
  double abs_t_quantile = 0.0;  // (1 - alpha) quantile of |T_i|
  long redraws = 0;
  std::uint64_t skipped_splits = 0;  // exhaustive mode only
  VarianceMethod variance_method = VarianceMethod::none;
  double observed_variance = 0.0;  // estimate used to studentize observed T
  bool observed_variance_zero = false;
  bool degenerate_distribution = false;  // all trial statistics equal
  bool exhaustive = false;
};

struct TestReport {
  double observed_t = 0.0;
  double observed_s = 0.0;
  double p_value = 1.0;
  std::pair<double, double> p_ci = {0.0, 1.0};
  std::uint64_t n_trials_effective = 0;
  Direction direction = Direction::undetermined;
  double alpha = 0.05;
  Sidedness sided = Sidedness::two_sided;
  TestDiagnostics diagnostics;
};

/// (1 + extreme_count) / (1 + n_trials). `sided` records the convention
/// under which extreme_count was tallied (|S_i| >= |S| for two-sided); the
/// arithmetic itself is side-free.
double pvalue_from_counts(std::uint64_t extreme_count, std::uint64_t n_trials,
                          Sidedness sided = Sidedness::two_sided);

/// Confidence interval for the binomial proportion extreme_count / n_trials
/// (Wilson score by default, Agresti-Coull selectable).
std::pair<double, double> pvalue_confidence_interval(
    std::uint64_t extreme_count, std::uint64_t n_trials, double level,
    CiMethod method = CiMethod::wilson);

/// Rejects at p <= alpha (closed boundary) and maps the sign of the
/// observed studentized statistic to a direction; Undetermined otherwise.
Direction directional_conclusion(double p_value, double observed_s,
                                 double alpha, Sidedness sided);

/// The permutation test: draws plan.n_trials replicates (or enumerates the
/// whole split space in exhaustive mode), studentizes per the metric spec,
/// and produces the p-value with its confidence interval and a directional
/// conclusion. Bit-identical results for a fixed master seed regardless of
/// thread count.
TestReport permutation_test(const GroupedSample& data, const MetricSpec& metric,
                            const PermutationPlan& plan,
                            const TestOptions& options = {});

/// Association test between paired coordinates via the pairing permutation
/// and the Pearson correlation statistic. Studentization `bootstrap` is the
/// faithful per-trial recipe: every permuted pairing (and the observed one)
/// is scaled by its own pairs-bootstrap standard deviation, which stays
/// valid under strong heteroskedasticity. `permutation_pooled` scales the
/// observed value by its bootstrap sd but trial values by the permutation
/// distribution's own spread (cheap; adequate when the permutation
/// distribution is close to normal). `none` compares raw correlations.
TestReport association_test(std::span<const std::pair<double, double>> pairs,
                            Studentization studentization, int n_trials,
                            std::uint64_t master_seed,
                            const TestOptions& options = {});

struct SweepRow {
  double tau = 0.0;
  double delta = 0.0;      // unscaled observed metric difference
  double threshold = 0.0;  // (1-alpha) quantile of |T_i|, unscaled
  double p_value = 1.0;
  bool detected = false;
  bool skipped = false;
};

/// Threshold sweep: one permutation test per grid point, recording the
/// unscaled observed difference and the permutation distribution's
/// rejection threshold mapped back to the difference scale.
std::vector<SweepRow> min_detectable_difference(
    const GroupedSample& data, MetricSpec metric,
    std::span<const double> tau_grid, const PermutationPlan& plan,
    const TestOptions& options = {});

/// Smallest |delta| among detected grid points (NaN when nothing was
/// detected).
double min_detected_difference(std::span<const SweepRow> rows);

/// Smallest per-group size n such that 2 * sqrt(var(T)) <= target under the
/// normal approximation with equal group sizes, where var(T) =
/// 2 * per_unit_variance / n. Evaluates to ceil(8 * v / d^2).
std::uint64_t sample_size_estimate(double target_difference,
                                   double per_unit_variance);

/// Per-unit variance plug-in from data for sample sizing: the across-group
/// average of q(1-q)/share for proportion metrics, of the score variance
/// for the mean, and of the per-group DeLong component times group size for
/// AUC.
double per_unit_variance_from_data(const GroupedSample& data, MetricKind kind,
                                   std::optional<double> threshold =
                                       std::nullopt);

}  // namespace fairperm
