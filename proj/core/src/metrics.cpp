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

#include "fairperm/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fairperm {

bool has_closed_form_variance(MetricKind kind) {
  switch (kind) {
    case MetricKind::mean_of_score:
    case MetricKind::fnr:
    case MetricKind::fpr:
    case MetricKind::recall:
    case MetricKind::tnr:
    case MetricKind::auc:
    case MetricKind::equalized_odds_y0:
    case MetricKind::equalized_odds_y1:
      return true;
    case MetricKind::precision:
    case MetricKind::accuracy:
    case MetricKind::pearson_correlation:
      return false;
  }
  return false;
}

bool is_group_metric(MetricKind kind) {
  return kind != MetricKind::pearson_correlation;
}

const char* metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::mean_of_score: return "mean";
    case MetricKind::fnr: return "fnr";
    case MetricKind::fpr: return "fpr";
    case MetricKind::recall: return "recall";
    case MetricKind::tnr: return "tnr";
    case MetricKind::precision: return "precision";
    case MetricKind::accuracy: return "accuracy";
    case MetricKind::auc: return "auc";
    case MetricKind::pearson_correlation: return "pearson";
    case MetricKind::equalized_odds_y0: return "eo-y0";
    case MetricKind::equalized_odds_y1: return "eo-y1";
  }
  return "unknown";
}

std::optional<MetricKind> parse_metric_kind(const std::string& name) {
  if (name == "mean") return MetricKind::mean_of_score;
  if (name == "fnr") return MetricKind::fnr;
  if (name == "fpr") return MetricKind::fpr;
  if (name == "recall" || name == "tpr") return MetricKind::recall;
  if (name == "tnr") return MetricKind::tnr;
  if (name == "precision") return MetricKind::precision;
  if (name == "accuracy") return MetricKind::accuracy;
  if (name == "auc") return MetricKind::auc;
  if (name == "pearson") return MetricKind::pearson_correlation;
  if (name == "eo-y0") return MetricKind::equalized_odds_y0;
  if (name == "eo-y1") return MetricKind::equalized_odds_y1;
  return std::nullopt;
}

double scale_factor(ScaleConvention scale, const GroupedSample& data) {
  switch (scale) {
    case ScaleConvention::unscaled: return 1.0;
    case ScaleConvention::sqrt_n:
      return std::sqrt(static_cast<double>(data.size()));
    case ScaleConvention::sqrt_n_a:
      return std::sqrt(static_cast<double>(data.n_a()));
  }
  return 1.0;
}

double auc_from_scores(std::span<const double> positive_scores,
                       std::span<const double> negative_scores,
                       TieRule tie_rule) {
  if (positive_scores.empty() || negative_scores.empty()) {
    raise(ErrorCode::empty_conditioning_class,
          "AUC requires at least one positive and one negative");
  }
  std::vector<double> pos(positive_scores.begin(), positive_scores.end());
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  // Merge walk: for each positive, the number of strictly smaller and the
  // number of tied negatives. Counts are half-integers, so the sum is exact.
  double concordant = 0.0;
  std::size_t below = 0;  // negatives strictly below current positive
  for (const double p : pos) {
    while (below < neg.size() && neg[below] < p) ++below;
    concordant += static_cast<double>(below);
    if (tie_rule == TieRule::midrank) {
      std::size_t tied_end = below;
      while (tied_end < neg.size() && neg[tied_end] == p) ++tied_end;
      concordant += 0.5 * static_cast<double>(tied_end - below);
    }
  }
  return concordant / (static_cast<double>(pos.size()) *
                       static_cast<double>(neg.size()));
}

double pearson_correlation(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) {
    raise(ErrorCode::insufficient_data,
          "Pearson correlation requires at least 3 pairs");
  }
  const double n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pairs) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : pairs) {
    const double dx = x - mx, dy = y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    raise(ErrorCode::degenerate_variance,
          "a coordinate is constant; correlation undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

MetricEvaluator::MetricEvaluator(const GroupedSample& data,
                                 const MetricSpec& spec)
    : data_(&data), spec_(spec) {
  if (!is_group_metric(spec.kind)) {
    raise(ErrorCode::invalid_argument,
          "pearson correlation is not a two-group metric; use the "
          "association test");
  }
  scale_ = scale_factor(spec.scale, data);

  const auto& records = data.records();
  const std::size_t n = records.size();
  label_pos_.resize(n);
  pred_pos_.resize(n);
  scores_.resize(n);

  const bool needs_scores = spec.kind == MetricKind::mean_of_score ||
                            spec.kind == MetricKind::auc ||
                            spec.threshold.has_value();
  if (needs_scores && !data.has_scores()) {
    raise(ErrorCode::invalid_argument,
          std::string(metric_kind_name(spec.kind)) +
              " needs a score column (or remove --threshold)");
  }
  const bool needs_predictions =
      spec.kind != MetricKind::mean_of_score && spec.kind != MetricKind::auc;
  if (needs_predictions && !spec.threshold.has_value() &&
      !data.has_predictions()) {
    raise(ErrorCode::invalid_argument,
          std::string(metric_kind_name(spec.kind)) +
              " needs a prediction column or a threshold");
  }

  for (std::size_t i = 0; i < n; ++i) {
    label_pos_[i] = records[i].label_positive ? 1 : 0;
    scores_[i] = records[i].score;
    if (spec.threshold.has_value()) {
      pred_pos_[i] = records[i].score > *spec.threshold ? 1 : 0;
    } else {
      pred_pos_[i] = records[i].predicted_positive ? 1 : 0;
    }
  }
}

double MetricEvaluator::group_value(
    std::span<const std::uint32_t> members) const {
  switch (spec_.kind) {
    case MetricKind::mean_of_score: {
      if (members.empty()) {
        raise(ErrorCode::empty_conditioning_class, "empty group");
      }
      double s = 0;
      for (const auto i : members) s += scores_[i];
      return s / static_cast<double>(members.size());
    }
    case MetricKind::fnr:
    case MetricKind::recall:
    case MetricKind::equalized_odds_y1: {
      std::size_t cond = 0, pred_pos = 0;
      for (const auto i : members) {
        cond += label_pos_[i];
        pred_pos += static_cast<std::size_t>(label_pos_[i] & pred_pos_[i]);
      }
      if (cond == 0) {
        raise(ErrorCode::empty_conditioning_class,
              "no positive-labeled records in group");
      }
      const double tpr =
          static_cast<double>(pred_pos) / static_cast<double>(cond);
      return spec_.kind == MetricKind::fnr ? 1.0 - tpr : tpr;
    }
    case MetricKind::fpr:
    case MetricKind::tnr:
    case MetricKind::equalized_odds_y0: {
      std::size_t cond = 0, pred_pos = 0;
      for (const auto i : members) {
        cond += static_cast<std::size_t>(1 - label_pos_[i]);
        pred_pos +=
            static_cast<std::size_t>((1 - label_pos_[i]) & pred_pos_[i]);
      }
      if (cond == 0) {
        raise(ErrorCode::empty_conditioning_class,
              "no negative-labeled records in group");
      }
      const double fpr =
          static_cast<double>(pred_pos) / static_cast<double>(cond);
      return spec_.kind == MetricKind::tnr ? 1.0 - fpr : fpr;
    }
    case MetricKind::precision: {
      std::size_t pred = 0, correct = 0;
      for (const auto i : members) {
        pred += pred_pos_[i];
        correct += static_cast<std::size_t>(pred_pos_[i] & label_pos_[i]);
      }
      if (pred == 0) {
        raise(ErrorCode::empty_conditioning_class,
              "no predicted-positive records in group");
      }
      return static_cast<double>(correct) / static_cast<double>(pred);
    }
    case MetricKind::accuracy: {
      if (members.empty()) {
        raise(ErrorCode::empty_conditioning_class, "empty group");
      }
      std::size_t correct = 0;
      for (const auto i : members) {
        correct += static_cast<std::size_t>(label_pos_[i] == pred_pos_[i]);
      }
      return static_cast<double>(correct) /
             static_cast<double>(members.size());
    }
    case MetricKind::auc: {
      std::vector<double> pos, neg;
      pos.reserve(members.size());
      neg.reserve(members.size());
      for (const auto i : members) {
        (label_pos_[i] ? pos : neg).push_back(scores_[i]);
      }
      return auc_from_scores(pos, neg, spec_.tie_rule);
    }
    case MetricKind::pearson_correlation:
      break;
  }
  raise(ErrorCode::invalid_argument, "metric is not a group metric");
}

double MetricEvaluator::statistic(
    std::span<const std::uint32_t> pseudo_a,
    std::span<const std::uint32_t> pseudo_b) const {
  return scale_ * (group_value(pseudo_a) - group_value(pseudo_b));
}

double MetricEvaluator::observed() const {
  return statistic(data_->a_indices(), data_->b_indices());
}

double group_metric(const GroupedSample& data, Group which, MetricKind kind,
                    std::optional<double> threshold, TieRule tie_rule) {
  MetricSpec spec;
  spec.kind = kind;
  spec.threshold = threshold;
  spec.tie_rule = tie_rule;
  MetricEvaluator eval(data, spec);
  return eval.group_value(which == Group::a ? data.a_indices()
                                            : data.b_indices());
}

double difference_statistic(const GroupedSample& data, MetricKind kind,
                            std::optional<double> threshold,
                            ScaleConvention scale, TieRule tie_rule) {
  MetricSpec spec;
  spec.kind = kind;
  spec.threshold = threshold;
  spec.scale = scale;
  spec.tie_rule = tie_rule;
  return MetricEvaluator(data, spec).observed();
}

std::pair<double, double> equalized_odds_distances(
    const GroupedSample& data, std::optional<double> threshold) {
  const double delta0 = difference_statistic(
      data, MetricKind::fpr, threshold, ScaleConvention::unscaled);
  const double delta1 = difference_statistic(
      data, MetricKind::recall, threshold, ScaleConvention::unscaled);
  return {delta0, delta1};
}

}  // namespace fairperm
