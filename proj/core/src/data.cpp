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

#include "fairperm/data.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace fairperm {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_conditioning_class: return "EmptyConditioningClass";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::metric_undefined_on_resample:
      return "MetricUndefinedOnResample";
    case ErrorCode::degenerate_data: return "DegenerateData";
    case ErrorCode::insufficient_trials: return "InsufficientTrials";
    case ErrorCode::too_many_splits: return "TooManySplits";
    case ErrorCode::invalid_scheme: return "InvalidScheme";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::unparsable_value: return "UnparsableValue";
    case ErrorCode::group_not_found: return "GroupNotFound";
    case ErrorCode::empty_group: return "EmptyGroup";
  }
  return "UnknownError";
}

GroupedSample GroupedSample::from_records(std::vector<ScoredRecord> records,
                                          bool has_scores,
                                          bool has_predictions) {
  GroupedSample sample;
  sample.has_scores_ = has_scores;
  sample.has_predictions_ = has_predictions;

  // Canonical order: results must depend only on the record multiset.
  std::sort(records.begin(), records.end(),
            [](const ScoredRecord& x, const ScoredRecord& y) {
              return std::tuple(x.group, x.label_positive, x.score,
                                x.predicted_positive) <
                     std::tuple(y.group, y.label_positive, y.score,
                                y.predicted_positive);
            });
  sample.records_ = std::move(records);

  for (std::uint32_t i = 0; i < sample.records_.size(); ++i) {
    const ScoredRecord& r = sample.records_[i];
    if (has_scores && !std::isfinite(r.score)) {
      raise(ErrorCode::invalid_argument, "non-finite score in record");
    }
    if (r.group == Group::a) {
      sample.a_indices_.push_back(i);
      ++sample.n_a_;
      if (r.label_positive) ++sample.n_a_pos_;
    } else {
      sample.b_indices_.push_back(i);
      ++sample.n_b_;
      if (r.label_positive) ++sample.n_b_pos_;
    }
  }
  if (sample.n_a_ == 0 || sample.n_b_ == 0) {
    raise(ErrorCode::empty_group,
          sample.n_a_ == 0 ? "group A has no records" : "group B has no records");
  }
  return sample;
}

GroupedSample GroupedSample::swapped_groups() const {
  std::vector<ScoredRecord> flipped = records_;
  for (ScoredRecord& r : flipped) {
    r.group = (r.group == Group::a) ? Group::b : Group::a;
  }
  return from_records(std::move(flipped), has_scores_, has_predictions_);
}

}  // namespace fairperm
