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
#include <string>

#include "fairperm/data.hpp"

namespace fairperm {

/// Column bindings for ingesting scored records from a CSV file. Labels
/// and predictions accept either the {0,1} or the {-1,+1} encoding and are
/// normalized on the way in.
struct DatasetSchema {
  std::string group_column;
  std::string label_column;
  std::optional<std::string> score_column;
  std::optional<std::string> prediction_column;
  std::string group_a_value;
  std::string group_b_value;
};

struct LoadedDataset {
  GroupedSample sample;
  std::uint64_t rows_total = 0;  // data rows in the file
  std::uint64_t rows_used = 0;   // rows matching the two group values
};

/// Parses the file, normalizes labels, and filters to the two requested
/// group values. Rows with missing or unparsable values in bound columns
/// are errors, never silently dropped; every error names the offending
/// row and column.
LoadedDataset load_csv(const std::string& path, const DatasetSchema& schema);

}  // namespace fairperm
