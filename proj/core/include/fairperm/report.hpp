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
#include <utility>
#include <variant>
#include <vector>

#include "fairperm/inference.hpp"
#include "fairperm/simlab.hpp"

namespace fairperm {

struct InputDigest {
  std::string path;
  std::uint64_t rows_total = 0;
  std::string group_a_value;
  std::string group_b_value;
  std::uint64_t n_a = 0, n_b = 0;
  std::uint64_t n_a_pos = 0, n_b_pos = 0;
};

/// Equalized-odds sweep: per threshold, the FPR and Recall rows.
struct EoSweepRow {
  double tau = 0.0;
  SweepRow fpr;
  SweepRow recall;
};

struct SweepResult {
  std::vector<EoSweepRow> rows;
  double min_detected_fpr = 0.0;     // NaN when nothing detected
  double min_detected_recall = 0.0;  // NaN when nothing detected
};

struct PowerResult {
  double target_difference = 0.0;
  double per_unit_variance = 0.0;
  std::uint64_t n_per_group = 0;
  std::string note;
};

using ConfigValue =
    std::variant<std::monostate, bool, std::int64_t, double, std::string>;

/// The full emitted document: input digest, configuration echo, payload,
/// tool version, wall-clock duration. Re-running the recorded configuration
/// against the same input reproduces the payload byte for byte; only the
/// "runtime" section (duration, thread count) may differ.
struct ReportDocument {
  std::string command;  // test | sweep | simulate | power
  std::optional<InputDigest> input;
  std::vector<std::pair<std::string, ConfigValue>> config;
  std::variant<TestReport, StudyResult, SweepResult, PowerResult> payload;
  double wall_ms = 0.0;
  int threads = 1;
};

/// Pretty-printed JSON (2-space indent, stable key order, shortest
/// round-trip floats).
std::string render_json(const ReportDocument& doc);

/// Plot-ready TSV with a fixed, documented column order per command.
std::string render_tsv(const ReportDocument& doc);

}  // namespace fairperm
