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

#include "fairperm/variance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fairperm {

const char* variance_method_name(VarianceMethod method) {
  switch (method) {
    case VarianceMethod::closed_form_mean: return "closed-form-mean";
    case VarianceMethod::closed_form_proportion:
      return "closed-form-proportion";
    case VarianceMethod::delong_auc: return "delong-auc";
    case VarianceMethod::bootstrap: return "bootstrap";
    case VarianceMethod::permutation_pooled: return "permutation-pooled";
    case VarianceMethod::none: return "none";
  }
  return "unknown";
}

double VarianceEstimate::value_at(ScaleConvention target,
                                  const GroupedSample& data) const {
  const double from = scale_factor(scale, data);
  const double to = scale_factor(target, data);
  return value * (to / from) * (to / from);
}

namespace {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1)
  std::size_t n = 0;
};

MeanVar mean_and_variance(std::span<const double> values) {
  MeanVar mv;
  mv.n = values.size();
  if (mv.n == 0) return mv;
  double sum = 0.0;
  for (const double v : values) sum += v;
  mv.mean = sum / static_cast<double>(mv.n);
  if (mv.n < 2) return mv;
  double ss = 0.0;
  for (const double v : values) {
    const double d = v - mv.mean;
    ss += d * d;
  }
  mv.variance = ss / static_cast<double>(mv.n - 1);
  return mv;
}

MeanVar score_variance(const MetricEvaluator& eval,
                       std::span<const std::uint32_t> members) {
  std::vector<double> scores;
  scores.reserve(members.size());
  for (const auto i : members) scores.push_back(eval.score(i));
  return mean_and_variance(scores);
}

// Variance of the sqrt(n)-scaled mean difference on a reassignment.
double mean_variance_sqrt_n(const MetricEvaluator& eval,
                            std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b) {
  if (a.size() < 2 || b.size() < 2) {
    raise(ErrorCode::insufficient_data,
          "mean variance needs >= 2 records per group");
  }
  const MeanVar va = score_variance(eval, a);
  const MeanVar vb = score_variance(eval, b);
  const double n = static_cast<double>(a.size() + b.size());
  const double p_a = static_cast<double>(a.size()) / n;
  return va.variance / p_a + vb.variance / (1.0 - p_a);
}

struct ConditionalCounts {
  std::size_t cond = 0;   // records in the conditioning class
  std::size_t event = 0;  // of those, records where the metric event holds
  std::size_t total = 0;
};

ConditionalCounts conditional_counts(const MetricEvaluator& eval,
                                     MetricKind kind,
                                     std::span<const std::uint32_t> members) {
  ConditionalCounts c;
  c.total = members.size();
  const bool on_positives = kind == MetricKind::fnr ||
                            kind == MetricKind::recall ||
                            kind == MetricKind::equalized_odds_y1;
  for (const auto i : members) {
    const bool lab = eval.label_positive(i);
    if (lab != on_positives) continue;
    ++c.cond;
    const bool pred = eval.predicted_positive(i);
    switch (kind) {
      case MetricKind::fnr: c.event += !pred; break;
      case MetricKind::recall:
      case MetricKind::equalized_odds_y1: c.event += pred; break;
      case MetricKind::fpr:
      case MetricKind::equalized_odds_y0: c.event += pred; break;
      case MetricKind::tnr: c.event += !pred; break;
      default: break;
    }
  }
  return c;
}

// Variance of the sqrt(n)-scaled proportion difference on a reassignment.
double proportion_variance_sqrt_n(const MetricEvaluator& eval, MetricKind kind,
                                  std::span<const std::uint32_t> a,
                                  std::span<const std::uint32_t> b) {
  const ConditionalCounts ca = conditional_counts(eval, kind, a);
  const ConditionalCounts cb = conditional_counts(eval, kind, b);
  if (ca.cond == 0 || cb.cond == 0) {
    raise(ErrorCode::empty_conditioning_class,
          "conditioning class empty in a group");
  }
  const double qa = static_cast<double>(ca.event) / static_cast<double>(ca.cond);
  const double qb = static_cast<double>(cb.event) / static_cast<double>(cb.cond);
  const double n = static_cast<double>(a.size() + b.size());
  const double p_a = static_cast<double>(a.size()) / n;
  const double share_a =
      static_cast<double>(ca.cond) / static_cast<double>(ca.total);
  const double share_b =
      static_cast<double>(cb.cond) / static_cast<double>(cb.total);
  const double v = qa * (1.0 - qa) / (p_a * share_a) +
                   qb * (1.0 - qb) / ((1.0 - p_a) * share_b);
  if (v <= 0.0) {
    raise(ErrorCode::degenerate_variance,
          "both group proportions are exactly 0 or 1");
  }
  return v;
}

// DeLong structural components for one group's members; returns the
// variance of that group's AUC estimate.
double delong_group_variance(const MetricEvaluator& eval, TieRule tie_rule,
                             std::span<const std::uint32_t> members) {
  std::vector<double> pos, neg;
  for (const auto i : members) {
    (eval.label_positive(i) ? pos : neg).push_back(eval.score(i));
  }
  if (pos.size() < 2 || neg.size() < 2) {
    raise(ErrorCode::insufficient_data,
          "DeLong needs >= 2 positives and >= 2 negatives per group");
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const auto kernel_sum = [&](double v, const std::vector<double>& others,
                              bool v_is_positive) {
    // Number of others on the correct side of v, plus half the ties under
    // midrank. `others` is sorted ascending.
    const auto lo = std::lower_bound(others.begin(), others.end(), v);
    const auto hi = std::upper_bound(others.begin(), others.end(), v);
    const double ties = static_cast<double>(hi - lo);
    const double correct =
        v_is_positive ? static_cast<double>(lo - others.begin())
                      : static_cast<double>(others.end() - hi);
    return correct + (tie_rule == TieRule::midrank ? 0.5 * ties : 0.0);
  };

  std::vector<double> v10(pos.size()), v01(neg.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    v10[i] = kernel_sum(pos[i], neg, true) / static_cast<double>(neg.size());
  }
  for (std::size_t j = 0; j < neg.size(); ++j) {
    v01[j] = kernel_sum(neg[j], pos, false) / static_cast<double>(pos.size());
  }
  const double s10 = mean_and_variance(v10).variance;
  const double s01 = mean_and_variance(v01).variance;
  return s10 / static_cast<double>(pos.size()) +
         s01 / static_cast<double>(neg.size());
}

double delong_variance_sqrt_n(const MetricEvaluator& eval, TieRule tie_rule,
                              std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b) {
  const double var_a = delong_group_variance(eval, tie_rule, a);
  const double var_b = delong_group_variance(eval, tie_rule, b);
  const double n = static_cast<double>(a.size() + b.size());
  const double v = n * (var_a + var_b);
  if (v <= 0.0) {
    raise(ErrorCode::degenerate_variance,
          "all DeLong structural components are constant");
  }
  return v;
}

}  // namespace

VarianceEstimate mean_variance(const GroupedSample& data) {
  MetricSpec spec;
  spec.kind = MetricKind::mean_of_score;
  MetricEvaluator eval(data, spec);
  if (data.n_a() < 2 || data.n_b() < 2) {
    raise(ErrorCode::insufficient_data,
          "mean variance needs >= 2 records per group");
  }
  const MeanVar va = score_variance(eval, data.a_indices());
  const MeanVar vb = score_variance(eval, data.b_indices());
  VarianceEstimate est;
  est.value = va.variance + vb.variance * data.lambda();
  est.method = VarianceMethod::closed_form_mean;
  est.scale = ScaleConvention::sqrt_n_a;
  return est;
}

VarianceEstimate proportion_variance(const GroupedSample& data,
                                     MetricKind kind,
                                     std::optional<double> threshold) {
  switch (kind) {
    case MetricKind::fnr:
    case MetricKind::fpr:
    case MetricKind::recall:
    case MetricKind::tnr:
    case MetricKind::equalized_odds_y0:
    case MetricKind::equalized_odds_y1:
      break;
    default:
      raise(ErrorCode::invalid_argument,
            std::string(metric_kind_name(kind)) +
                " is not a label-conditional proportion metric");
  }
  MetricSpec spec;
  spec.kind = kind;
  spec.threshold = threshold;
  MetricEvaluator eval(data, spec);
  VarianceEstimate est;
  est.value = proportion_variance_sqrt_n(eval, kind, data.a_indices(),
                                         data.b_indices());
  est.method = VarianceMethod::closed_form_proportion;
  est.scale = ScaleConvention::sqrt_n;
  return est;
}

std::pair<double, double> delong_group_variances(const GroupedSample& data,
                                                 TieRule tie_rule) {
  MetricSpec spec;
  spec.kind = MetricKind::auc;
  spec.tie_rule = tie_rule;
  MetricEvaluator eval(data, spec);
  return {delong_group_variance(eval, tie_rule, data.a_indices()),
          delong_group_variance(eval, tie_rule, data.b_indices())};
}

VarianceEstimate delong_auc_variance(const GroupedSample& data,
                                     TieRule tie_rule) {
  MetricSpec spec;
  spec.kind = MetricKind::auc;
  spec.tie_rule = tie_rule;
  MetricEvaluator eval(data, spec);
  VarianceEstimate est;
  est.value = delong_variance_sqrt_n(eval, tie_rule, data.a_indices(),
                                     data.b_indices());
  est.method = VarianceMethod::delong_auc;
  est.scale = ScaleConvention::sqrt_n;
  return est;
}

double closed_form_variance_for_split(const MetricEvaluator& eval,
                                      std::span<const std::uint32_t> pseudo_a,
                                      std::span<const std::uint32_t> pseudo_b) {
  const MetricSpec& spec = eval.spec();
  double v_sqrt_n = 0.0;
  switch (spec.kind) {
    case MetricKind::mean_of_score:
      v_sqrt_n = mean_variance_sqrt_n(eval, pseudo_a, pseudo_b);
      break;
    case MetricKind::fnr:
    case MetricKind::fpr:
    case MetricKind::recall:
    case MetricKind::tnr:
    case MetricKind::equalized_odds_y0:
    case MetricKind::equalized_odds_y1:
      v_sqrt_n =
          proportion_variance_sqrt_n(eval, spec.kind, pseudo_a, pseudo_b);
      break;
    case MetricKind::auc:
      v_sqrt_n = delong_variance_sqrt_n(eval, spec.tie_rule, pseudo_a,
                                        pseudo_b);
      break;
    default:
      raise(ErrorCode::invalid_argument,
            std::string(metric_kind_name(spec.kind)) +
                " has no closed-form variance estimator; use bootstrap");
  }
  const double c = eval.scale();
  const double n = static_cast<double>(eval.data().size());
  return v_sqrt_n * (c * c / n);
}

double bootstrap_variance_for_split(const MetricEvaluator& eval,
                                    std::span<const std::uint32_t> pseudo_a,
                                    std::span<const std::uint32_t> pseudo_b,
                                    int n_bootstrap, RngStream& stream,
                                    long redraw_cap, long& redraws) {
  if (n_bootstrap < 2) {
    raise(ErrorCode::invalid_argument, "bootstrap needs n_b >= 2");
  }
  const double t0 = eval.statistic(pseudo_a, pseudo_b);
  std::vector<std::uint32_t> a_star(pseudo_a.size()), b_star(pseudo_b.size());
  double accum = 0.0;
  for (int t = 0; t < n_bootstrap; ++t) {
    for (;;) {
      for (auto& x : a_star) {
        x = pseudo_a[stream.uniform_below(pseudo_a.size())];
      }
      for (auto& x : b_star) {
        x = pseudo_b[stream.uniform_below(pseudo_b.size())];
      }
      try {
        const double d = eval.statistic(a_star, b_star) - t0;
        accum += d * d;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_conditioning_class) throw;
        if (++redraws > redraw_cap) {
          raise(ErrorCode::degenerate_data,
                "bootstrap redraw cap exceeded; resamples keep losing a "
                "conditioning class");
        }
      }
    }
  }
  return accum / static_cast<double>(n_bootstrap);
}

VarianceEstimate bootstrap_variance(const GroupedSample& data,
                                    const MetricSpec& metric, int n_bootstrap,
                                    std::uint64_t seed,
                                    int redraw_cap_factor) {
  MetricEvaluator eval(data, metric);
  const double t0 = eval.observed();
  const long redraw_cap =
      static_cast<long>(redraw_cap_factor) * static_cast<long>(n_bootstrap);
  long redraws = 0;
  std::vector<std::uint32_t> a_star(data.n_a()), b_star(data.n_b());
  double accum = 0.0;
  if (n_bootstrap < 2) {
    raise(ErrorCode::invalid_argument, "bootstrap needs n_b >= 2");
  }
  for (int t = 0; t < n_bootstrap; ++t) {
    RngStream stream = rng_stream(seed, static_cast<std::uint64_t>(t),
                                  StreamPurpose::bootstrap);
    for (;;) {
      for (auto& x : a_star) {
        x = data.a_indices()[stream.uniform_below(data.n_a())];
      }
      for (auto& x : b_star) {
        x = data.b_indices()[stream.uniform_below(data.n_b())];
      }
      try {
        const double d = eval.statistic(a_star, b_star) - t0;
        accum += d * d;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_conditioning_class) throw;
        if (++redraws > redraw_cap) {
          raise(ErrorCode::degenerate_data,
                "bootstrap redraw cap exceeded; resamples keep losing a "
                "conditioning class");
        }
      }
    }
  }
  VarianceEstimate est;
  est.value = accum / static_cast<double>(n_bootstrap);
  est.method = VarianceMethod::bootstrap;
  est.scale = metric.scale;
  est.n_bootstrap = n_bootstrap;
  return est;
}

double bootstrap_variance_pairs(std::span<const std::pair<double, double>> pairs,
                                int n_bootstrap, std::uint64_t seed,
                                int redraw_cap_factor) {
  if (n_bootstrap < 2) {
    raise(ErrorCode::invalid_argument, "bootstrap needs n_b >= 2");
  }
  const double r0 = pearson_correlation(pairs);
  const long redraw_cap =
      static_cast<long>(redraw_cap_factor) * static_cast<long>(n_bootstrap);
  long redraws = 0;
  std::vector<std::pair<double, double>> resampled(pairs.size());
  double accum = 0.0;
  for (int t = 0; t < n_bootstrap; ++t) {
    RngStream stream = rng_stream(seed, static_cast<std::uint64_t>(t),
                                  StreamPurpose::bootstrap);
    for (;;) {
      for (auto& p : resampled) {
        p = pairs[stream.uniform_below(pairs.size())];
      }
      try {
        const double d = pearson_correlation(resampled) - r0;
        accum += d * d;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_variance) throw;
        if (++redraws > redraw_cap) {
          raise(ErrorCode::degenerate_data,
                "bootstrap redraw cap exceeded; resamples are constant");
        }
      }
    }
  }
  return accum / static_cast<double>(n_bootstrap);
}

}  // namespace fairperm
