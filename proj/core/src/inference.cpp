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

#include "fairperm/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairperm/parallel.hpp"

namespace fairperm {

const char* sidedness_name(Sidedness s) {
  switch (s) {
    case Sidedness::two_sided: return "two";
    case Sidedness::upper: return "upper";
    case Sidedness::lower: return "lower";
  }
  return "unknown";
}

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::a_greater: return "a_greater";
    case Direction::b_greater: return "b_greater";
    case Direction::undetermined: return "undetermined";
  }
  return "unknown";
}

namespace {

// Acklam's rational approximation to the standard normal quantile,
// refined with one Halley step; |relative error| < 1e-9 over (0, 1).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    raise(ErrorCode::invalid_argument, "quantile level must be in (0,1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e =
      0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * 3.14159265358979323846) *
                   std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

std::uint64_t count_extreme(std::span<const double> trial_s, double observed_s,
                            Sidedness sided) {
  std::uint64_t extreme = 0;
  switch (sided) {
    case Sidedness::two_sided: {
      const double abs_s = std::abs(observed_s);
      for (const double s : trial_s) {
        if (std::abs(s) >= abs_s) ++extreme;
      }
      break;
    }
    case Sidedness::upper:
      for (const double s : trial_s) {
        if (s >= observed_s) ++extreme;
      }
      break;
    case Sidedness::lower:
      for (const double s : trial_s) {
        if (s <= observed_s) ++extreme;
      }
      break;
  }
  return extreme;
}

struct MomentSummary {
  double mean = 0.0;
  double sd = 0.0;        // sample standard deviation
  double variance = 0.0;  // sample variance
};

MomentSummary moments(std::span<const double> values) {
  MomentSummary m;
  const std::size_t n = values.size();
  if (n == 0) return m;
  double sum = 0.0;
  for (const double v : values) sum += v;
  m.mean = sum / static_cast<double>(n);
  if (n < 2) return m;
  double ss = 0.0;
  for (const double v : values) {
    const double d = v - m.mean;
    ss += d * d;
  }
  m.variance = ss / static_cast<double>(n - 1);
  m.sd = std::sqrt(m.variance);
  return m;
}

double abs_quantile(std::span<const double> values, double level) {
  if (values.empty()) return 0.0;
  std::vector<double> abs_vals(values.size());
  std::transform(values.begin(), values.end(), abs_vals.begin(),
                 [](double v) { return std::abs(v); });
  std::sort(abs_vals.begin(), abs_vals.end());
  std::size_t k = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(abs_vals.size())));
  k = std::min(std::max<std::size_t>(k, 1), abs_vals.size());
  return abs_vals[k - 1];
}

// Studentizes the observed statistic by an estimated variance; v == 0 is
// fail-soft only for T == 0 in the pooled shortcut, an error otherwise.
double studentize_observed(double t_obs, double v_obs, bool fail_soft,
                           TestDiagnostics& diag) {
  diag.observed_variance = v_obs;
  if (v_obs > 0.0) return t_obs / std::sqrt(v_obs);
  diag.observed_variance_zero = true;
  if (t_obs == 0.0) return 0.0;
  if (fail_soft) {
    return std::copysign(std::numeric_limits<double>::infinity(), t_obs);
  }
  raise(ErrorCode::degenerate_variance,
        "estimated variance of the observed statistic is zero");
}

TestReport finalize_report(double t_obs, double s_obs,
                           std::span<const double> trial_s,
                           std::span<const double> trial_t,
                           const TestOptions& options, TestDiagnostics diag) {
  TestReport report;
  report.observed_t = t_obs;
  report.observed_s = s_obs;
  report.alpha = options.alpha;
  report.sided = options.sided;
  report.n_trials_effective = trial_s.size();

  const MomentSummary perm = moments(trial_t);
  diag.perm_mean = perm.mean;
  diag.perm_variance = perm.variance;
  diag.abs_t_quantile = abs_quantile(trial_t, 1.0 - options.alpha);

  std::uint64_t extreme;
  if (diag.degenerate_distribution) {
    extreme = trial_s.size();
    report.p_value = 1.0;
  } else {
    extreme = count_extreme(trial_s, s_obs, options.sided);
    report.p_value =
        pvalue_from_counts(extreme, trial_s.size(), options.sided);
  }
  report.p_ci = pvalue_confidence_interval(extreme, trial_s.size(),
                                           options.ci_level,
                                           options.ci_method);
  report.direction = directional_conclusion(report.p_value, s_obs,
                                            options.alpha, options.sided);
  report.diagnostics = diag;
  return report;
}

}  // namespace

double pvalue_from_counts(std::uint64_t extreme_count, std::uint64_t n_trials,
                          Sidedness /*sided*/) {
  if (extreme_count > n_trials) {
    raise(ErrorCode::invalid_argument, "extreme count exceeds trial count");
  }
  return (1.0 + static_cast<double>(extreme_count)) /
         (1.0 + static_cast<double>(n_trials));
}

std::pair<double, double> pvalue_confidence_interval(
    std::uint64_t extreme_count, std::uint64_t n_trials, double level,
    CiMethod method) {
  if (n_trials == 0) return {0.0, 1.0};
  const double z = normal_quantile(0.5 + level / 2.0);
  const double n = static_cast<double>(n_trials);
  const double p_hat = static_cast<double>(extreme_count) / n;

  if (method == CiMethod::agresti_coull) {
    const double n_tilde = n + z * z;
    const double p_tilde = (static_cast<double>(extreme_count) + z * z / 2) /
                           n_tilde;
    const double half = z * std::sqrt(p_tilde * (1 - p_tilde) / n_tilde);
    return {std::max(0.0, p_tilde - half), std::min(1.0, p_tilde + half)};
  }

  const double denom = 1.0 + z * z / n;
  const double center = (p_hat + z * z / (2 * n)) / denom;
  const double half =
      z * std::sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Direction directional_conclusion(double p_value, double observed_s,
                                 double alpha, Sidedness sided) {
  if (p_value > alpha) return Direction::undetermined;
  switch (sided) {
    case Sidedness::two_sided:
      if (observed_s > 0.0) return Direction::a_greater;
      if (observed_s < 0.0) return Direction::b_greater;
      return Direction::undetermined;
    case Sidedness::upper:
      return Direction::a_greater;
    case Sidedness::lower:
      return Direction::b_greater;
  }
  return Direction::undetermined;
}

namespace {

TestReport exhaustive_permutation_test(const GroupedSample& data,
                                       const MetricSpec& metric,
                                       const PermutationPlan& plan,
                                       const TestOptions& options) {
  if (metric.studentization == Studentization::bootstrap ||
      metric.studentization == Studentization::permutation_pooled) {
    raise(ErrorCode::invalid_argument,
          "exhaustive mode supports studentization none or closed-form");
  }
  MetricEvaluator eval(data, metric);
  const ReplicateSplit ident = identity_split(data);
  const double t_obs = eval.observed();

  TestDiagnostics diag;
  diag.exhaustive = true;
  double s_obs = t_obs;
  if (metric.studentization == Studentization::closed_form) {
    const double v_obs =
        closed_form_variance_for_split(eval, ident.a(), ident.b());
    s_obs = studentize_observed(t_obs, v_obs, false, diag);
    diag.variance_method = metric.kind == MetricKind::mean_of_score
                               ? VarianceMethod::closed_form_mean
                           : metric.kind == MetricKind::auc
                               ? VarianceMethod::delong_auc
                               : VarianceMethod::closed_form_proportion;
  }

  SplitEnumerator enumerator(data, plan.scheme, options.exhaustive_cap);
  std::vector<double> trial_t, trial_s;
  trial_t.reserve(enumerator.count());
  trial_s.reserve(enumerator.count());
  ReplicateSplit split;
  while (enumerator.next(split)) {
    try {
      const double t_i = eval.statistic(split.a(), split.b());
      double s_i = t_i;
      if (metric.studentization == Studentization::closed_form) {
        const double v_i =
            closed_form_variance_for_split(eval, split.a(), split.b());
        if (v_i <= 0.0) {
          raise(ErrorCode::degenerate_variance, "zero variance on split");
        }
        s_i = t_i / std::sqrt(v_i);
      }
      trial_t.push_back(t_i);
      trial_s.push_back(s_i);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::empty_conditioning_class &&
          e.code() != ErrorCode::degenerate_variance &&
          e.code() != ErrorCode::insufficient_data) {
        throw;
      }
      ++diag.skipped_splits;
    }
  }
  if (trial_s.empty()) {
    raise(ErrorCode::insufficient_trials,
          "metric undefined on every enumerated split");
  }

  TestReport report;
  report.observed_t = t_obs;
  report.observed_s = s_obs;
  report.alpha = options.alpha;
  report.sided = options.sided;
  report.n_trials_effective = trial_s.size();

  const MomentSummary perm = moments(trial_t);
  diag.perm_mean = perm.mean;
  diag.perm_variance = perm.variance;
  diag.abs_t_quantile = abs_quantile(trial_t, 1.0 - options.alpha);

  // Exact p-value: the observed split is one of the enumerated splits, so
  // no add-one smoothing is applied and the Monte-Carlo CI collapses.
  const std::uint64_t extreme = count_extreme(trial_s, s_obs, options.sided);
  report.p_value =
      static_cast<double>(extreme) / static_cast<double>(trial_s.size());
  report.p_ci = {report.p_value, report.p_value};
  report.direction = directional_conclusion(report.p_value, s_obs,
                                            options.alpha, options.sided);
  report.diagnostics = diag;
  return report;
}

}  // namespace

TestReport permutation_test(const GroupedSample& data,
                            const MetricSpec& metric,
                            const PermutationPlan& plan,
                            const TestOptions& options) {
  if (plan.scheme == Scheme::pairing) {
    raise(ErrorCode::invalid_scheme,
          "pairing scheme applies to paired data; use association_test");
  }
  if (plan.n_trials < 1) {
    raise(ErrorCode::invalid_argument, "n_trials must be >= 1");
  }
  if (metric.studentization == Studentization::permutation_pooled &&
      plan.n_trials < 20 && !options.exhaustive) {
    raise(ErrorCode::invalid_argument,
          "pooled studentization needs at least 20 trials");
  }
  if (plan.scheme == Scheme::within_outcome &&
      (data.n_pos() == 0 || data.n_neg() == 0)) {
    raise(ErrorCode::invalid_scheme,
          "within-outcome permutation needs both label classes in the pool");
  }
  if (options.exhaustive) {
    return exhaustive_permutation_test(data, metric, plan, options);
  }

  MetricEvaluator eval(data, metric);
  const ReplicateSplit ident = identity_split(data);
  const double t_obs = eval.observed();

  TestDiagnostics diag;
  double s_obs = t_obs;
  switch (metric.studentization) {
    case Studentization::none:
      diag.variance_method = VarianceMethod::none;
      break;
    case Studentization::closed_form: {
      const double v_obs =
          closed_form_variance_for_split(eval, ident.a(), ident.b());
      s_obs = studentize_observed(t_obs, v_obs, false, diag);
      diag.variance_method = metric.kind == MetricKind::mean_of_score
                                 ? VarianceMethod::closed_form_mean
                             : metric.kind == MetricKind::auc
                                 ? VarianceMethod::delong_auc
                                 : VarianceMethod::closed_form_proportion;
      break;
    }
    case Studentization::bootstrap: {
      const double v_obs =
          bootstrap_variance(data, metric, options.n_bootstrap,
                             plan.master_seed, options.redraw_cap_factor)
              .value;
      s_obs = studentize_observed(t_obs, v_obs, false, diag);
      diag.variance_method = VarianceMethod::bootstrap;
      break;
    }
    case Studentization::permutation_pooled: {
      // The runtime shortcut: the observed difference is studentized by a
      // bootstrap standard deviation while trial values are studentized by
      // the permutation distribution's own spread (applied below).
      const double v_obs =
          bootstrap_variance(data, metric, options.n_bootstrap,
                             plan.master_seed, options.redraw_cap_factor)
              .value;
      s_obs = studentize_observed(t_obs, v_obs, true, diag);
      diag.variance_method = VarianceMethod::permutation_pooled;
      break;
    }
  }

  const std::size_t n_trials = static_cast<std::size_t>(plan.n_trials);
  std::vector<double> trial_t(n_trials), trial_s(n_trials);
  const bool per_trial_closed =
      metric.studentization == Studentization::closed_form;
  const bool per_trial_bootstrap =
      metric.studentization == Studentization::bootstrap;

  std::atomic<long> redraws{0};
  const long redraw_cap = static_cast<long>(options.redraw_cap_factor) *
                          static_cast<long>(n_trials);
  const auto note_redraw = [&]() {
    if (redraws.fetch_add(1, std::memory_order_relaxed) + 1 > redraw_cap) {
      raise(ErrorCode::degenerate_data,
            "trial redraw cap exceeded; replicates keep losing the metric");
    }
  };

  parallel_for(n_trials, options.threads, [&](std::size_t i) {
    RngStream stream = rng_stream(plan.master_seed, i, StreamPurpose::permute);
    RngStream boot_stream =
        rng_stream(plan.master_seed, i, StreamPurpose::trial_bootstrap);
    ReplicateSplit split;
    long local_boot_redraws = 0;
    const long local_boot_cap = static_cast<long>(options.redraw_cap_factor) *
                                static_cast<long>(options.n_bootstrap);
    for (;;) {
      if (plan.scheme == Scheme::pooled) {
        permute_pooled(data, stream, split);
      } else {
        permute_within_outcome(data, stream, split);
      }
      try {
        const double t_i = eval.statistic(split.a(), split.b());
        double s_i = t_i;
        if (per_trial_closed) {
          const double v_i =
              closed_form_variance_for_split(eval, split.a(), split.b());
          if (v_i <= 0.0) {
            raise(ErrorCode::degenerate_variance, "zero variance on split");
          }
          s_i = t_i / std::sqrt(v_i);
        } else if (per_trial_bootstrap) {
          const double v_i = bootstrap_variance_for_split(
              eval, split.a(), split.b(), options.n_bootstrap, boot_stream,
              local_boot_cap, local_boot_redraws);
          if (v_i <= 0.0) {
            raise(ErrorCode::degenerate_variance, "zero variance on split");
          }
          s_i = t_i / std::sqrt(v_i);
        }
        trial_t[i] = t_i;
        trial_s[i] = s_i;
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_conditioning_class &&
            e.code() != ErrorCode::degenerate_variance &&
            e.code() != ErrorCode::insufficient_data) {
          throw;
        }
        note_redraw();
      }
    }
  });
  diag.redraws = redraws.load();

  if (metric.studentization == Studentization::permutation_pooled) {
    const MomentSummary perm = moments(trial_t);
    if (perm.sd == 0.0) {
      diag.degenerate_distribution = true;
    } else {
      for (std::size_t i = 0; i < n_trials; ++i) {
        trial_s[i] = (trial_t[i] - perm.mean) / perm.sd;
      }
    }
  }

  return finalize_report(t_obs, s_obs, trial_s, trial_t, options, diag);
}

namespace {

// Bootstrap variance of the correlation of the pairing (x_k, e_{perm(k)}),
// drawing all resamples from `stream`. Single-pass moment accumulation per
// resample; degenerate resamples (constant coordinate) are redrawn.
double pairing_bootstrap_variance(std::span<const double> x,
                                  std::span<const double> e,
                                  std::span<const std::uint32_t> perm,
                                  double r0, int n_bootstrap,
                                  RngStream& stream, long redraw_cap,
                                  long& redraws) {
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  double accum = 0.0;
  for (int b = 0; b < n_bootstrap; ++b) {
    for (;;) {
      double sx = 0, se = 0, sxx = 0, see = 0, sxe = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(stream.uniform_below(n));
        const double xv = x[k];
        const double ev = e[perm[k]];
        sx += xv;
        se += ev;
        sxx += xv * xv;
        see += ev * ev;
        sxe += xv * ev;
      }
      const double cxx = sxx - sx * sx / dn;
      const double cee = see - se * se / dn;
      const double cxe = sxe - sx * se / dn;
      if (cxx > 0.0 && cee > 0.0) {
        const double d = cxe / std::sqrt(cxx * cee) - r0;
        accum += d * d;
        break;
      }
      if (++redraws > redraw_cap) {
        raise(ErrorCode::degenerate_data,
              "bootstrap redraw cap exceeded; resamples are constant");
      }
    }
  }
  return accum / static_cast<double>(n_bootstrap);
}

}  // namespace

TestReport association_test(std::span<const std::pair<double, double>> pairs,
                            Studentization studentization, int n_trials,
                            std::uint64_t master_seed,
                            const TestOptions& options) {
  if (n_trials < 1) {
    raise(ErrorCode::invalid_argument, "n_trials must be >= 1");
  }
  if (studentization == Studentization::closed_form) {
    raise(ErrorCode::invalid_argument,
          "correlation has no closed-form variance; use bootstrap");
  }
  const double r_obs = pearson_correlation(pairs);

  const std::size_t n = pairs.size();
  std::vector<double> xs(n), es(n), dx(n), de(n);
  double mx = 0, me = 0;
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = pairs[k].first;
    es[k] = pairs[k].second;
    mx += xs[k];
    me += es[k];
  }
  mx /= static_cast<double>(n);
  me /= static_cast<double>(n);
  double sxx = 0, see = 0;
  for (std::size_t k = 0; k < n; ++k) {
    dx[k] = xs[k] - mx;
    de[k] = es[k] - me;
    sxx += dx[k] * dx[k];
    see += de[k] * de[k];
  }
  const double denom = std::sqrt(sxx * see);

  TestDiagnostics diag;
  double s_obs = r_obs;
  if (studentization != Studentization::none) {
    const double v_obs = bootstrap_variance_pairs(
        pairs, options.n_bootstrap, master_seed, options.redraw_cap_factor);
    s_obs = studentize_observed(r_obs, v_obs, true, diag);
    diag.variance_method = studentization == Studentization::bootstrap
                               ? VarianceMethod::bootstrap
                               : VarianceMethod::permutation_pooled;
  }

  const bool per_trial_bootstrap =
      studentization == Studentization::bootstrap;
  std::vector<double> trial_t(static_cast<std::size_t>(n_trials));
  std::vector<double> trial_s(static_cast<std::size_t>(n_trials));
  std::atomic<long> redraws{0};
  parallel_for(
      static_cast<std::size_t>(n_trials), options.threads,
      [&](std::size_t i) {
        RngStream stream = rng_stream(master_seed, i, StreamPurpose::permute);
        std::vector<std::uint32_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0u);
        for (std::size_t k = 0; k + 1 < n; ++k) {
          const std::size_t j =
              k + static_cast<std::size_t>(stream.uniform_below(n - k));
          std::swap(perm[k], perm[j]);
        }
        double sxe = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          sxe += dx[k] * de[perm[k]];
        }
        const double r_i = sxe / denom;
        trial_t[i] = r_i;
        if (per_trial_bootstrap) {
          RngStream boot_stream =
              rng_stream(master_seed, i, StreamPurpose::trial_bootstrap);
          long local_redraws = 0;
          const double v_i = pairing_bootstrap_variance(
              xs, es, perm, r_i, options.n_bootstrap, boot_stream,
              static_cast<long>(options.redraw_cap_factor) *
                  static_cast<long>(options.n_bootstrap),
              local_redraws);
          redraws.fetch_add(local_redraws, std::memory_order_relaxed);
          if (v_i > 0.0) {
            trial_s[i] = r_i / std::sqrt(v_i);
          } else {
            trial_s[i] = r_i == 0.0
                             ? 0.0
                             : std::copysign(
                                   std::numeric_limits<double>::infinity(),
                                   r_i);
          }
        } else {
          trial_s[i] = r_i;
        }
      });
  diag.redraws = redraws.load();

  if (studentization == Studentization::permutation_pooled) {
    const MomentSummary perm = moments(trial_t);
    if (perm.sd == 0.0) {
      diag.degenerate_distribution = true;
    } else {
      for (std::size_t i = 0; i < trial_s.size(); ++i) {
        trial_s[i] = (trial_t[i] - perm.mean) / perm.sd;
      }
    }
  }

  return finalize_report(r_obs, s_obs, trial_s, trial_t, options, diag);
}

std::vector<SweepRow> min_detectable_difference(
    const GroupedSample& data, MetricSpec metric,
    std::span<const double> tau_grid, const PermutationPlan& plan,
    const TestOptions& options) {
  if (tau_grid.empty()) {
    raise(ErrorCode::invalid_argument, "threshold grid is empty");
  }
  std::vector<SweepRow> rows;
  rows.reserve(tau_grid.size());
  const double c = scale_factor(metric.scale, data);
  for (std::size_t g = 0; g < tau_grid.size(); ++g) {
    SweepRow row;
    row.tau = tau_grid[g];
    MetricSpec spec_g = metric;
    spec_g.threshold = tau_grid[g];
    PermutationPlan plan_g = plan;
    plan_g.master_seed = derive_seed(plan.master_seed, g, StreamPurpose::sweep);
    try {
      const TestReport report =
          permutation_test(data, spec_g, plan_g, options);
      row.delta = report.observed_t / c;
      row.threshold = report.diagnostics.abs_t_quantile / c;
      row.p_value = report.p_value;
      row.detected = report.p_value <= options.alpha;
    } catch (const Error&) {
      row.skipped = true;
    }
    rows.push_back(row);
  }
  return rows;
}

double min_detected_difference(std::span<const SweepRow> rows) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRow& row : rows) {
    if (row.skipped || !row.detected) continue;
    const double mag = std::abs(row.delta);
    if (std::isnan(best) || mag < best) best = mag;
  }
  return best;
}

std::uint64_t sample_size_estimate(double target_difference,
                                   double per_unit_variance) {
  if (target_difference <= 0.0) {
    raise(ErrorCode::invalid_argument, "target difference must be positive");
  }
  if (per_unit_variance <= 0.0) {
    raise(ErrorCode::invalid_argument, "per-unit variance must be positive");
  }
  const double raw =
      8.0 * per_unit_variance / (target_difference * target_difference);
  return static_cast<std::uint64_t>(std::ceil(raw - 1e-9));
}

double per_unit_variance_from_data(const GroupedSample& data, MetricKind kind,
                                   std::optional<double> threshold) {
  MetricSpec spec;
  spec.kind = kind;
  spec.threshold = threshold;
  switch (kind) {
    case MetricKind::mean_of_score: {
      if (data.n_a() < 2 || data.n_b() < 2) {
        raise(ErrorCode::insufficient_data,
              "score variance needs >= 2 records per group");
      }
      MetricEvaluator eval(data, spec);
      const auto group_var = [&](std::span<const std::uint32_t> members) {
        double sum = 0.0;
        for (const auto i : members) sum += eval.score(i);
        const double m = sum / static_cast<double>(members.size());
        double ss = 0.0;
        for (const auto i : members) {
          const double d = eval.score(i) - m;
          ss += d * d;
        }
        return ss / static_cast<double>(members.size() - 1);
      };
      return 0.5 * (group_var(data.a_indices()) + group_var(data.b_indices()));
    }
    case MetricKind::fnr:
    case MetricKind::fpr:
    case MetricKind::recall:
    case MetricKind::tnr:
    case MetricKind::equalized_odds_y0:
    case MetricKind::equalized_odds_y1: {
      MetricEvaluator eval(data, spec);
      const auto per_group = [&](std::span<const std::uint32_t> members) {
        const bool on_positives = kind == MetricKind::fnr ||
                                  kind == MetricKind::recall ||
                                  kind == MetricKind::equalized_odds_y1;
        std::size_t cond = 0, event = 0;
        for (const auto i : members) {
          if (eval.label_positive(i) != on_positives) continue;
          ++cond;
          const bool pred = eval.predicted_positive(i);
          const bool hit = (kind == MetricKind::fnr || kind == MetricKind::tnr)
                               ? !pred
                               : pred;
          event += hit;
        }
        if (cond == 0) {
          raise(ErrorCode::empty_conditioning_class,
                "conditioning class empty in a group");
        }
        const double q =
            static_cast<double>(event) / static_cast<double>(cond);
        const double share =
            static_cast<double>(cond) / static_cast<double>(members.size());
        return q * (1.0 - q) / share;
      };
      return 0.5 *
             (per_group(data.a_indices()) + per_group(data.b_indices()));
    }
    case MetricKind::auc: {
      const auto [va, vb] = delong_group_variances(data, spec.tie_rule);
      return 0.5 * (static_cast<double>(data.n_a()) * va +
                    static_cast<double>(data.n_b()) * vb);
    }
    default:
      raise(ErrorCode::invalid_argument,
            std::string(metric_kind_name(kind)) +
                " has no per-unit variance plug-in; pass --variance");
  }
}

}  // namespace fairperm
