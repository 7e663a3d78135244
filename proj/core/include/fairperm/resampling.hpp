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
#include <vector>

#include "fairperm/data.hpp"
#include "fairperm/metrics.hpp"
#include "fairperm/rng.hpp"

namespace fairperm {

enum class Scheme { pooled, within_outcome, pairing };

const char* scheme_name(Scheme scheme);

struct PermutationPlan {
  Scheme scheme = Scheme::pooled;
  int n_trials = 1000;
  std::uint64_t master_seed = 0;
};

/// A reassignment of the pooled records to pseudo-groups, stored as an
/// index permutation (never a data copy): the first n_a entries of `order`
/// are pseudo-group A, the rest pseudo-group B.
struct ReplicateSplit {
  std::vector<std::uint32_t> order;
  std::uint32_t n_a = 0;

  std::span<const std::uint32_t> a() const { return {order.data(), n_a}; }
  std::span<const std::uint32_t> b() const {
    return {order.data() + n_a, order.size() - n_a};
  }
};

/// The original grouping as a split (A indices first).
ReplicateSplit identity_split(const GroupedSample& data);

/// Uniformly random reassignment to pseudo-groups of the original sizes.
/// The buffered overloads reset and reuse `out` so hot loops stay
/// allocation-free; results are a pure function of (data, stream state).
void permute_pooled(const GroupedSample& data, RngStream& stream,
                    ReplicateSplit& out);
ReplicateSplit permute_pooled(const GroupedSample& data, RngStream& stream);

/// Positives are reassigned uniformly among positive slots and negatives
/// among negative slots, preserving all four per-group per-class counts.
void permute_within_outcome(const GroupedSample& data, RngStream& stream,
                            ReplicateSplit& out);
ReplicateSplit permute_within_outcome(const GroupedSample& data,
                                      RngStream& stream);

/// Pairing permutation for association tests: (x_i, e_{pi(i)}) with the x
/// order unchanged.
std::vector<std::pair<double, double>> permute_pairing(
    std::span<const std::pair<double, double>> pairs, RngStream& stream);

/// Number of distinct splits: C(n, n_A) for pooled,
/// C(n+, n_A+) * C(n-, n_A-) for within-outcome. Throws TooManySplits
/// beyond `cap`.
std::uint64_t count_splits(const GroupedSample& data, Scheme scheme,
                           std::uint64_t cap = 200000);

/// Yields every distinct split exactly once (exact-test oracle for small n).
class SplitEnumerator {
 public:
  SplitEnumerator(const GroupedSample& data, Scheme scheme,
                  std::uint64_t cap = 200000);

  std::uint64_t count() const { return count_; }

  /// Writes the next split into `out`; returns false when exhausted.
  bool next(ReplicateSplit& out);

 private:
  void emit(ReplicateSplit& out) const;
  static bool advance(std::vector<std::uint32_t>& combo, std::uint32_t n);

  const GroupedSample* data_;
  Scheme scheme_;
  std::uint64_t count_ = 0;
  bool done_ = false;
  bool first_ = true;
  // Pooled: choose_ picks pseudo-A out of all pooled indices.
  // Within-outcome: pos_choose_/neg_choose_ pick within each label class.
  std::vector<std::uint32_t> choose_;
  std::vector<std::uint32_t> pos_choose_, neg_choose_;
  std::vector<std::uint32_t> pos_pool_, neg_pool_;
};

/// The "basic" bootstrap comparator: resample each group with replacement
/// at its own size and approximate the distribution of T by T* - T.
struct BootstrapDistribution {
  double observed = 0.0;            // T on the original data
  std::vector<double> deviations;   // sorted T* - T
  double p_value = 1.0;             // (1 + #{|T*-T| >= |T|}) / (1 + n_b)
  long redraws = 0;
};

BootstrapDistribution basic_bootstrap_distribution(const GroupedSample& data,
                                                   const MetricSpec& metric,
                                                   int n_bootstrap,
                                                   std::uint64_t seed,
                                                   int redraw_cap_factor = 100);

}  // namespace fairperm
