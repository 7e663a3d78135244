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

#include "fairperm/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairperm {

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::pooled: return "pooled";
    case Scheme::within_outcome: return "within-outcome";
    case Scheme::pairing: return "pairing";
  }
  return "unknown";
}

ReplicateSplit identity_split(const GroupedSample& data) {
  ReplicateSplit split;
  split.order.reserve(data.size());
  split.order.insert(split.order.end(), data.a_indices().begin(),
                     data.a_indices().end());
  split.order.insert(split.order.end(), data.b_indices().begin(),
                     data.b_indices().end());
  split.n_a = static_cast<std::uint32_t>(data.n_a());
  return split;
}

namespace {

// Partial Fisher-Yates: after k swaps the first k entries are a uniformly
// chosen ordered k-sample, hence the first k form a uniform k-subset.
void partial_shuffle(std::vector<std::uint32_t>& items, std::size_t k,
                     RngStream& stream) {
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(stream.uniform_below(n - i));
    std::swap(items[i], items[j]);
  }
}

}  // namespace

void permute_pooled(const GroupedSample& data, RngStream& stream,
                    ReplicateSplit& out) {
  const std::size_t n = data.size();
  if (n < 2) {
    raise(ErrorCode::insufficient_data, "pooled permutation needs >= 2 records");
  }
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0u);
  out.n_a = static_cast<std::uint32_t>(data.n_a());
  partial_shuffle(out.order, data.n_a(), stream);
}

ReplicateSplit permute_pooled(const GroupedSample& data, RngStream& stream) {
  ReplicateSplit out;
  permute_pooled(data, stream, out);
  return out;
}

void permute_within_outcome(const GroupedSample& data, RngStream& stream,
                            ReplicateSplit& out) {
  const std::size_t n_pos = data.n_pos();
  const std::size_t n_neg = data.n_neg();
  if (data.n_a_pos() > n_pos || data.n_a_neg() > n_neg) {
    raise(ErrorCode::invalid_scheme,
          "per-group class count exceeds pooled class count");
  }

  std::vector<std::uint32_t> pos, neg;
  pos.reserve(n_pos);
  neg.reserve(n_neg);
  for (std::uint32_t i = 0; i < data.size(); ++i) {
    (data.records()[i].label_positive ? pos : neg).push_back(i);
  }

  partial_shuffle(pos, data.n_a_pos(), stream);
  partial_shuffle(neg, data.n_a_neg(), stream);

  out.order.clear();
  out.order.reserve(data.size());
  out.order.insert(out.order.end(), pos.begin(), pos.begin() + data.n_a_pos());
  out.order.insert(out.order.end(), neg.begin(), neg.begin() + data.n_a_neg());
  out.order.insert(out.order.end(), pos.begin() + data.n_a_pos(), pos.end());
  out.order.insert(out.order.end(), neg.begin() + data.n_a_neg(), neg.end());
  out.n_a = static_cast<std::uint32_t>(data.n_a());
}

ReplicateSplit permute_within_outcome(const GroupedSample& data,
                                      RngStream& stream) {
  ReplicateSplit out;
  permute_within_outcome(data, stream, out);
  return out;
}

std::vector<std::pair<double, double>> permute_pairing(
    std::span<const std::pair<double, double>> pairs, RngStream& stream) {
  if (pairs.size() < 2) {
    raise(ErrorCode::insufficient_data, "pairing permutation needs >= 2 pairs");
  }
  std::vector<std::uint32_t> perm(pairs.size());
  std::iota(perm.begin(), perm.end(), 0u);
  partial_shuffle(perm, perm.size(), stream);

  std::vector<std::pair<double, double>> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i] = {pairs[i].first, pairs[perm[i]].second};
  }
  return out;
}

namespace {

// C(n, k) saturating at cap + 1. Exact: the running product of i
// consecutive integers is divisible by i!.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k,
                              std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace

std::uint64_t count_splits(const GroupedSample& data, Scheme scheme,
                           std::uint64_t cap) {
  std::uint64_t total = 0;
  if (scheme == Scheme::pooled) {
    total = binomial_capped(data.size(), data.n_a(), cap);
  } else if (scheme == Scheme::within_outcome) {
    const std::uint64_t cp = binomial_capped(data.n_pos(), data.n_a_pos(), cap);
    const std::uint64_t cn = binomial_capped(data.n_neg(), data.n_a_neg(), cap);
    if (cp > cap || cn > cap || (cn != 0 && cp > cap / cn)) {
      total = cap + 1;
    } else {
      total = cp * cn;
    }
  } else {
    raise(ErrorCode::invalid_scheme, "pairing scheme has no split enumeration");
  }
  if (total > cap) {
    raise(ErrorCode::too_many_splits,
          "split space exceeds cap of " + std::to_string(cap));
  }
  return total;
}

SplitEnumerator::SplitEnumerator(const GroupedSample& data, Scheme scheme,
                                 std::uint64_t cap)
    : data_(&data), scheme_(scheme) {
  count_ = count_splits(data, scheme, cap);
  if (scheme_ == Scheme::pooled) {
    choose_.resize(data.n_a());
    std::iota(choose_.begin(), choose_.end(), 0u);
  } else {
    for (std::uint32_t i = 0; i < data.size(); ++i) {
      (data.records()[i].label_positive ? pos_pool_ : neg_pool_).push_back(i);
    }
    pos_choose_.resize(data.n_a_pos());
    std::iota(pos_choose_.begin(), pos_choose_.end(), 0u);
    neg_choose_.resize(data.n_a_neg());
    std::iota(neg_choose_.begin(), neg_choose_.end(), 0u);
  }
}

bool SplitEnumerator::advance(std::vector<std::uint32_t>& combo,
                              std::uint32_t n) {
  // Lexicographic successor of a k-combination of {0, ..., n-1}.
  const std::size_t k = combo.size();
  if (k == 0) return false;
  std::size_t i = k;
  while (i > 0) {
    --i;
    if (combo[i] < n - static_cast<std::uint32_t>(k - i)) {
      ++combo[i];
      for (std::size_t j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

void SplitEnumerator::emit(ReplicateSplit& out) const {
  out.order.clear();
  out.order.reserve(data_->size());
  out.n_a = static_cast<std::uint32_t>(data_->n_a());

  if (scheme_ == Scheme::pooled) {
    std::vector<bool> chosen(data_->size(), false);
    for (const auto c : choose_) {
      out.order.push_back(c);
      chosen[c] = true;
    }
    for (std::uint32_t i = 0; i < data_->size(); ++i) {
      if (!chosen[i]) out.order.push_back(i);
    }
    return;
  }

  std::vector<bool> pos_sel(pos_pool_.size(), false);
  std::vector<bool> neg_sel(neg_pool_.size(), false);
  for (const auto c : pos_choose_) {
    out.order.push_back(pos_pool_[c]);
    pos_sel[c] = true;
  }
  for (const auto c : neg_choose_) {
    out.order.push_back(neg_pool_[c]);
    neg_sel[c] = true;
  }
  for (std::size_t i = 0; i < pos_pool_.size(); ++i) {
    if (!pos_sel[i]) out.order.push_back(pos_pool_[i]);
  }
  for (std::size_t i = 0; i < neg_pool_.size(); ++i) {
    if (!neg_sel[i]) out.order.push_back(neg_pool_[i]);
  }
}

bool SplitEnumerator::next(ReplicateSplit& out) {
  if (done_) return false;
  if (first_) {
    first_ = false;
    emit(out);
    return true;
  }
  if (scheme_ == Scheme::pooled) {
    if (!advance(choose_, static_cast<std::uint32_t>(data_->size()))) {
      done_ = true;
      return false;
    }
    emit(out);
    return true;
  }
  // Within-outcome: odometer over (positive combo, negative combo).
  if (advance(neg_choose_, static_cast<std::uint32_t>(neg_pool_.size()))) {
    emit(out);
    return true;
  }
  std::iota(neg_choose_.begin(), neg_choose_.end(), 0u);
  if (advance(pos_choose_, static_cast<std::uint32_t>(pos_pool_.size()))) {
    emit(out);
    return true;
  }
  done_ = true;
  return false;
}

namespace {

// Resample `count` indices with replacement from `pool` into `out`.
void resample_into(std::span<const std::uint32_t> pool, std::size_t count,
                   RngStream& stream, std::vector<std::uint32_t>& out) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = pool[stream.uniform_below(pool.size())];
  }
}

}  // namespace

BootstrapDistribution basic_bootstrap_distribution(const GroupedSample& data,
                                                   const MetricSpec& metric,
                                                   int n_bootstrap,
                                                   std::uint64_t seed,
                                                   int redraw_cap_factor) {
  if (n_bootstrap < 1) {
    raise(ErrorCode::invalid_argument, "n_bootstrap must be >= 1");
  }
  MetricEvaluator eval(data, metric);
  BootstrapDistribution dist;
  dist.observed = eval.observed();

  const long redraw_cap =
      static_cast<long>(redraw_cap_factor) * static_cast<long>(n_bootstrap);
  std::vector<std::uint32_t> a_star, b_star;
  dist.deviations.reserve(n_bootstrap);

  for (int t = 0; t < n_bootstrap; ++t) {
    RngStream stream = rng_stream(seed, static_cast<std::uint64_t>(t),
                                  StreamPurpose::bootstrap);
    for (;;) {
      resample_into(data.a_indices(), data.n_a(), stream, a_star);
      resample_into(data.b_indices(), data.n_b(), stream, b_star);
      try {
        dist.deviations.push_back(eval.statistic(a_star, b_star) -
                                  dist.observed);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_conditioning_class) throw;
        if (++dist.redraws > redraw_cap) {
          raise(ErrorCode::degenerate_data,
                "bootstrap redraw cap exceeded; resamples keep losing a "
                "conditioning class");
        }
      }
    }
  }

  std::size_t extreme = 0;
  const double abs_obs = std::abs(dist.observed);
  for (const double d : dist.deviations) {
    if (std::abs(d) >= abs_obs) ++extreme;
  }
  dist.p_value = (1.0 + static_cast<double>(extreme)) /
                 (1.0 + static_cast<double>(n_bootstrap));
  std::sort(dist.deviations.begin(), dist.deviations.end());
  return dist;
}

}  // namespace fairperm
