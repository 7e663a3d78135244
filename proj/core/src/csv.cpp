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

#include "fairperm/csv.hpp"

#include <charconv>
#include <fstream>
#include <vector>

namespace fairperm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

// One CSV record; handles quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

[[noreturn]] void bad_value(std::uint64_t row, const std::string& column,
                            const std::string& what) {
  raise(ErrorCode::unparsable_value, what + " at row " + std::to_string(row) +
                                         ", column '" + column + "'");
}

bool parse_binary(const std::string& value, std::uint64_t row,
                  const std::string& column) {
  if (value == "1" || value == "+1") return true;
  if (value == "0" || value == "-1") return false;
  if (value.empty()) bad_value(row, column, "missing value");
  bad_value(row, column, "expected 0/1 or -1/+1, got '" + value + "'");
}

double parse_score(const std::string& value, std::uint64_t row,
                   const std::string& column) {
  if (value.empty()) bad_value(row, column, "missing value");
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    bad_value(row, column, "expected a number, got '" + value + "'");
  }
  return out;
}

}  // namespace

LoadedDataset load_csv(const std::string& path, const DatasetSchema& schema) {
  if (!schema.score_column && !schema.prediction_column) {
    raise(ErrorCode::invalid_argument,
          "bind at least one of the score and prediction columns");
  }
  if (schema.group_a_value == schema.group_b_value) {
    raise(ErrorCode::invalid_argument, "the two group values must differ");
  }
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::invalid_argument, "cannot open '" + path + "'");
  }

  std::string line;
  if (!std::getline(in, line)) {
    raise(ErrorCode::invalid_argument, "'" + path + "' is empty (no header)");
  }
  const std::vector<std::string> header = split_csv_line(line);
  const auto column_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    raise(ErrorCode::missing_column, "column '" + name + "' not in header");
  };

  const std::size_t group_idx = column_index(schema.group_column);
  const std::size_t label_idx = column_index(schema.label_column);
  const std::optional<std::size_t> score_idx =
      schema.score_column ? std::optional(column_index(*schema.score_column))
                          : std::nullopt;
  const std::optional<std::size_t> pred_idx =
      schema.prediction_column
          ? std::optional(column_index(*schema.prediction_column))
          : std::nullopt;

  std::vector<ScoredRecord> records;
  std::uint64_t rows_total = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++rows_total;
    const std::vector<std::string> fields = split_csv_line(line);
    const auto field = [&](std::size_t idx,
                           const std::string& name) -> const std::string& {
      if (idx >= fields.size()) bad_value(rows_total, name, "missing value");
      return fields[idx];
    };

    const std::string& group_value = field(group_idx, schema.group_column);
    if (group_value != schema.group_a_value &&
        group_value != schema.group_b_value) {
      continue;
    }
    ScoredRecord r;
    r.group = group_value == schema.group_a_value ? Group::a : Group::b;
    r.label_positive = parse_binary(field(label_idx, schema.label_column),
                                    rows_total, schema.label_column);
    if (score_idx) {
      r.score = parse_score(field(*score_idx, *schema.score_column),
                            rows_total, *schema.score_column);
    }
    if (pred_idx) {
      r.predicted_positive =
          parse_binary(field(*pred_idx, *schema.prediction_column), rows_total,
                       *schema.prediction_column);
    } else {
      r.predicted_positive = false;
    }
    records.push_back(r);
  }

  std::uint64_t n_a = 0;
  for (const auto& r : records) n_a += r.group == Group::a;
  if (n_a == 0) {
    raise(ErrorCode::group_not_found, "no rows with group value '" +
                                          schema.group_a_value + "' in '" +
                                          path + "'");
  }
  if (n_a == records.size()) {
    raise(ErrorCode::group_not_found, "no rows with group value '" +
                                          schema.group_b_value + "' in '" +
                                          path + "'");
  }

  LoadedDataset out{GroupedSample::from_records(std::move(records),
                                                schema.score_column.has_value(),
                                                schema.prediction_column
                                                    .has_value()),
                    rows_total, 0};
  out.rows_used = out.sample.size();
  return out;
}

}  // namespace fairperm
