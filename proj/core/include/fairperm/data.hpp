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
#include <vector>

#include "fairperm/error.hpp"

namespace fairperm {

enum class Group : std::uint8_t { a = 0, b = 1 };

/// One scored unit: protected-group membership, ground-truth binary label,
/// the model's ranking score, and the thresholded decision.
struct ScoredRecord {
  Group group = Group::a;
  bool label_positive = false;
  double score = 0.0;
  bool predicted_positive = false;
};

/// The two-group dataset. Records are held pooled in a canonical order
/// (sorted by group, label, score, prediction) so that every downstream
/// result depends only on the multiset of records and the seed, never on
/// input row order.
class GroupedSample {
 public:
  /// Validates and canonicalizes. Throws Error on an empty group or a
  /// non-finite score (when scores are present).
  static GroupedSample from_records(std::vector<ScoredRecord> records,
                                    bool has_scores = true,
                                    bool has_predictions = true);

  const std::vector<ScoredRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::size_t n_a() const { return n_a_; }
  std::size_t n_b() const { return n_b_; }
  std::size_t n_a_pos() const { return n_a_pos_; }
  std::size_t n_a_neg() const { return n_a_ - n_a_pos_; }
  std::size_t n_b_pos() const { return n_b_pos_; }
  std::size_t n_b_neg() const { return n_b_ - n_b_pos_; }
  std::size_t n_pos() const { return n_a_pos_ + n_b_pos_; }
  std::size_t n_neg() const { return size() - n_pos(); }

  /// p_A = n_A / (n_A + n_B), in (0, 1) by construction.
  double proportion_a() const {
    return static_cast<double>(n_a_) / static_cast<double>(size());
  }
  /// λ = n_A / n_B.
  double lambda() const {
    return static_cast<double>(n_a_) / static_cast<double>(n_b_);
  }

  bool has_scores() const { return has_scores_; }
  bool has_predictions() const { return has_predictions_; }

  /// Pooled record indices of group A (canonical order: 0 .. n_A-1).
  const std::vector<std::uint32_t>& a_indices() const { return a_indices_; }
  const std::vector<std::uint32_t>& b_indices() const { return b_indices_; }

  /// Returns a copy with the group tags exchanged (A becomes B).
  GroupedSample swapped_groups() const;

 private:
  std::vector<ScoredRecord> records_;
  std::vector<std::uint32_t> a_indices_;
  std::vector<std::uint32_t> b_indices_;
  std::size_t n_a_ = 0, n_b_ = 0;
  std::size_t n_a_pos_ = 0, n_b_pos_ = 0;
  bool has_scores_ = true;
  bool has_predictions_ = true;
};

}  // namespace fairperm
