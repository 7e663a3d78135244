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
#include <string>
#include <utility>
#include <vector>

#include "fairperm/data.hpp"

namespace fairperm {

enum class MetricKind {
  mean_of_score,
  fnr,
  fpr,
  recall,  // TPR
  tnr,
  precision,
  accuracy,
  auc,
  pearson_correlation,
  equalized_odds_y0,  // unscaled FPR gap
  equalized_odds_y1,  // unscaled Recall gap
};

/// Scaling applied to the raw metric difference. Scaling cancels in
/// studentized statistics; it is explicit so that unstudentized
/// diagnostics stay interpretable.
enum class ScaleConvention { unscaled, sqrt_n, sqrt_n_a };

/// AUC tie handling: strict counts a tied (positive, negative) score pair
/// as 0 concordances; midrank counts it as 1/2.
enum class TieRule { strict, midrank };

enum class Studentization { none, closed_form, bootstrap, permutation_pooled };

/// Identifies the test statistic: which metric difference, at which
/// threshold and scale, and how it gets studentized.
struct MetricSpec {
  MetricKind kind = MetricKind::mean_of_score;
  std::optional<double> threshold;
  ScaleConvention scale = ScaleConvention::sqrt_n;
  Studentization studentization = Studentization::permutation_pooled;
  TieRule tie_rule = TieRule::strict;
};

/// True for metrics backed by a closed-form variance estimator
/// (mean, label-conditional proportions, AUC). Precision, accuracy and
/// correlation are bootstrap-only.
bool has_closed_form_variance(MetricKind kind);

/// False only for pearson_correlation, which operates on paired data.
bool is_group_metric(MetricKind kind);

const char* metric_kind_name(MetricKind kind);
std::optional<MetricKind> parse_metric_kind(const std::string& name);

double scale_factor(ScaleConvention scale, const GroupedSample& data);

/// Empirical group-level metric over one group's records.
/// Throws EmptyConditioningClass when the conditioning label class (or the
/// predicted-positive set, for precision) is empty in this group.
double group_metric(const GroupedSample& data, Group which, MetricKind kind,
                    std::optional<double> threshold = std::nullopt,
                    TieRule tie_rule = TieRule::strict);

/// Pair-counting AUC estimate: concordant (positive, negative) score pairs
/// over n_pos * n_neg. Exactly equals the brute-force double loop.
double auc_from_scores(std::span<const double> positive_scores,
                       std::span<const double> negative_scores,
                       TieRule tie_rule = TieRule::strict);

/// scale * (metric_A - metric_B).
double difference_statistic(const GroupedSample& data, MetricKind kind,
                            std::optional<double> threshold = std::nullopt,
                            ScaleConvention scale = ScaleConvention::sqrt_n,
                            TieRule tie_rule = TieRule::strict);

/// Sample Pearson correlation of (x, e) pairs. Throws DegenerateVariance
/// when either coordinate is constant; requires at least 3 pairs.
double pearson_correlation(std::span<const std::pair<double, double>> pairs);

/// Equalized-odds distances (delta_0, delta_1): the unscaled FPR and Recall
/// gaps between the two groups.
std::pair<double, double> equalized_odds_distances(
    const GroupedSample& data, std::optional<double> threshold = std::nullopt);

/// Evaluates the difference statistic for arbitrary reassignments of the
/// pooled records to pseudo-groups. Effective labels and decisions are
/// cached once at construction, so per-replicate evaluation is a tight
/// loop over index spans. All methods are const and safe to call
/// concurrently.
class MetricEvaluator {
 public:
  MetricEvaluator(const GroupedSample& data, const MetricSpec& spec);

  /// Statistic on the original grouping.
  double observed() const;

  /// Statistic on a reassignment; pseudo-A and pseudo-B index spans must
  /// partition the pooled records. Throws EmptyConditioningClass when the
  /// metric is undefined on the reassignment.
  double statistic(std::span<const std::uint32_t> pseudo_a,
                   std::span<const std::uint32_t> pseudo_b) const;

  /// Group-level metric over an index span.
  double group_value(std::span<const std::uint32_t> members) const;

  double scale() const { return scale_; }
  const GroupedSample& data() const { return *data_; }
  const MetricSpec& spec() const { return spec_; }

  bool label_positive(std::uint32_t i) const { return label_pos_[i] != 0; }
  bool predicted_positive(std::uint32_t i) const { return pred_pos_[i] != 0; }
  double score(std::uint32_t i) const { return scores_[i]; }

 private:
  const GroupedSample* data_;
  MetricSpec spec_;
  double scale_ = 1.0;
  std::vector<std::uint8_t> label_pos_;
  std::vector<std::uint8_t> pred_pos_;
  std::vector<double> scores_;
};

}  // namespace fairperm
