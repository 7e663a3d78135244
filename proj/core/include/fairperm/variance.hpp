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
#include <span>
#include <utility>

#include "fairperm/data.hpp"
#include "fairperm/metrics.hpp"
#include "fairperm/rng.hpp"

namespace fairperm {

enum class VarianceMethod {
  closed_form_mean,
  closed_form_proportion,
  delong_auc,
  bootstrap,
  permutation_pooled,
  none,
};

const char* variance_method_name(VarianceMethod method);

/// Estimated variance of the difference statistic. `scale` records which
/// scaling convention `value` refers to; conversions go through value_at()
/// only, so a statistic is never scaled twice.
struct VarianceEstimate {
  double value = 0.0;
  VarianceMethod method = VarianceMethod::none;
  ScaleConvention scale = ScaleConvention::sqrt_n;
  int n_bootstrap = 0;

  /// Variance under another scale convention (multiplies by the squared
  /// ratio of scale factors).
  double value_at(ScaleConvention target, const GroupedSample& data) const;
};

/// Variance of the sqrt(n_A)-scaled mean difference: s_A^2 + s_B^2 * n_A/n_B
/// with unbiased sample variances. Requires >= 2 records per group.
VarianceEstimate mean_variance(const GroupedSample& data);

/// Plug-in variance of the sqrt(n)-scaled difference of a label-conditional
/// proportion (FNR, FPR, Recall, TNR, equalized-odds distances):
///   q_A(1-q_A) / (p_A c_A) + q_B(1-q_B) / ((1-p_A) c_B)
/// where q_g is the group's conditional proportion and c_g the share of the
/// group in the conditioning class. Throws DegenerateVariance when both
/// proportions are exactly 0 or 1.
VarianceEstimate proportion_variance(const GroupedSample& data,
                                     MetricKind kind,
                                     std::optional<double> threshold =
                                         std::nullopt);

/// DeLong structural-components estimate for the sqrt(n)-scaled AUC
/// difference. Per group: V10_i is the mean concordance of positive i
/// against all negatives, V01_j likewise for negatives; the group variance
/// is var(V10)/n+ + var(V01)/n-. Requires >= 2 positives and >= 2 negatives
/// per group.
VarianceEstimate delong_auc_variance(const GroupedSample& data,
                                     TieRule tie_rule = TieRule::strict);

/// The per-group DeLong variance components (group A first).
std::pair<double, double> delong_group_variances(
    const GroupedSample& data, TieRule tie_rule = TieRule::strict);

/// Bootstrap variance of the difference statistic: resample with
/// replacement n_A records from group A and n_B from group B per trial;
///   V = (1/n_b) * sum (T*_i - T)^2
/// centered at the original statistic with divisor n_b. Deterministic given
/// seed; resamples that lose a conditioning class are redrawn (capped at
/// redraw_cap_factor * n_b).
VarianceEstimate bootstrap_variance(const GroupedSample& data,
                                    const MetricSpec& metric, int n_bootstrap,
                                    std::uint64_t seed,
                                    int redraw_cap_factor = 100);

/// Same bootstrap recipe for paired data and the Pearson correlation:
/// resamples pairs jointly. Returns the variance of r.
double bootstrap_variance_pairs(std::span<const std::pair<double, double>> pairs,
                                int n_bootstrap, std::uint64_t seed,
                                int redraw_cap_factor = 100);

/// Closed-form variance of the evaluator's statistic on an arbitrary
/// reassignment, at the evaluator's own scale. Dispatches on the metric
/// kind; used per-replicate when studentizing trials.
double closed_form_variance_for_split(const MetricEvaluator& eval,
                                      std::span<const std::uint32_t> pseudo_a,
                                      std::span<const std::uint32_t> pseudo_b);

/// Eq-style bootstrap variance of the statistic on a reassignment, drawing
/// all resamples from `stream`. `redraws` accumulates across calls and is
/// checked against `redraw_cap`.
double bootstrap_variance_for_split(const MetricEvaluator& eval,
                                    std::span<const std::uint32_t> pseudo_a,
                                    std::span<const std::uint32_t> pseudo_b,
                                    int n_bootstrap, RngStream& stream,
                                    long redraw_cap, long& redraws);

}  // namespace fairperm
