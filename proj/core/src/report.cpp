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

#include "fairperm/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "fairperm/version.hpp"

namespace fairperm {

namespace {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip representation; "inf"/"nan" spelled out for TSV.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ordered_json json_number(double v) {
  // nlohmann serializes non-finite values as null already; keep explicit.
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json to_json(const TestReport& r) {
  ordered_json j;
  j["observed_t"] = json_number(r.observed_t);
  j["observed_s"] = json_number(r.observed_s);
  j["p_value"] = r.p_value;
  j["p_ci"] = {r.p_ci.first, r.p_ci.second};
  j["n_trials"] = r.n_trials_effective;
  j["direction"] = direction_name(r.direction);
  j["alpha"] = r.alpha;
  j["sided"] = sidedness_name(r.sided);
  ordered_json d;
  d["perm_mean"] = json_number(r.diagnostics.perm_mean);
  d["perm_variance"] = json_number(r.diagnostics.perm_variance);
  d["abs_t_quantile"] = json_number(r.diagnostics.abs_t_quantile);
  d["redraws"] = r.diagnostics.redraws;
  d["skipped_splits"] = r.diagnostics.skipped_splits;
  d["variance_method"] = variance_method_name(r.diagnostics.variance_method);
  d["observed_variance"] = json_number(r.diagnostics.observed_variance);
  d["observed_variance_zero"] = r.diagnostics.observed_variance_zero;
  d["degenerate_distribution"] = r.diagnostics.degenerate_distribution;
  d["exhaustive"] = r.diagnostics.exhaustive;
  j["diagnostics"] = d;
  return j;
}

ordered_json to_json(const StudyResult& r) {
  ordered_json j;
  j["rejection_probability"] = r.rejection_probability;
  j["rejection_ci"] = {r.rejection_ci.first, r.rejection_ci.second};
  ordered_json table;
  for (const auto& [level, rate] : r.alpha_table) {
    std::ostringstream key;
    key << level;
    table[key.str()] = rate;
  }
  j["alpha_table"] = table;
  ordered_json hist;
  ordered_json edges = ordered_json::array();
  for (int k = 0; k <= 10; ++k) edges.push_back(k / 10.0);
  hist["edges"] = edges;
  hist["mass"] = r.p_histogram;
  j["p_histogram"] = hist;
  j["n_sims"] = r.n_sims_completed;
  j["n_errored"] = r.n_errored;
  return j;
}

ordered_json to_json(const SweepRow& row) {
  ordered_json j;
  j["delta"] = json_number(row.delta);
  j["threshold"] = json_number(row.threshold);
  j["p_value"] = json_number(row.p_value);
  j["detected"] = row.detected;
  j["skipped"] = row.skipped;
  return j;
}

ordered_json to_json(const SweepResult& r) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const EoSweepRow& row : r.rows) {
    ordered_json jr;
    jr["tau"] = row.tau;
    jr["fpr"] = to_json(row.fpr);
    jr["recall"] = to_json(row.recall);
    rows.push_back(jr);
  }
  j["rows"] = rows;
  j["min_detected_fpr"] = json_number(r.min_detected_fpr);
  j["min_detected_recall"] = json_number(r.min_detected_recall);
  return j;
}

ordered_json to_json(const PowerResult& r) {
  ordered_json j;
  j["target_difference"] = r.target_difference;
  j["per_unit_variance"] = r.per_unit_variance;
  j["n_per_group"] = r.n_per_group;
  j["n_total"] = 2 * r.n_per_group;
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const ConfigValue& v) {
  if (std::holds_alternative<std::monostate>(v)) return nullptr;
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  if (std::holds_alternative<double>(v)) return json_number(std::get<double>(v));
  return std::get<std::string>(v);
}

std::string tsv_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '\t' || c == '\n') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_json(const ReportDocument& doc) {
  ordered_json j;
  j["tool"] = {{"name", "fairperm"}, {"version", kVersion}};
  j["command"] = doc.command;
  if (doc.input) {
    ordered_json in;
    in["path"] = doc.input->path;
    in["rows"] = doc.input->rows_total;
    in["group_a"] = {{"value", doc.input->group_a_value},
                     {"n", doc.input->n_a},
                     {"n_pos", doc.input->n_a_pos},
                     {"n_neg", doc.input->n_a - doc.input->n_a_pos}};
    in["group_b"] = {{"value", doc.input->group_b_value},
                     {"n", doc.input->n_b},
                     {"n_pos", doc.input->n_b_pos},
                     {"n_neg", doc.input->n_b - doc.input->n_b_pos}};
    j["input"] = in;
  }
  ordered_json cfg;
  for (const auto& [key, value] : doc.config) {
    cfg[key] = to_json(value);
  }
  j["config"] = cfg;
  std::visit([&](const auto& payload) { j["result"] = to_json(payload); },
             doc.payload);
  j["runtime"] = {{"wall_ms", doc.wall_ms}, {"threads", doc.threads}};
  return j.dump(2) + "\n";
}

std::string render_tsv(const ReportDocument& doc) {
  std::ostringstream out;
  if (std::holds_alternative<TestReport>(doc.payload)) {
    const auto& r = std::get<TestReport>(doc.payload);
    out << "observed_t\tobserved_s\tp_value\tp_ci_lower\tp_ci_upper\t"
           "n_trials\tdirection\talpha\tsided\n";
    out << fmt(r.observed_t) << '\t' << fmt(r.observed_s) << '\t'
        << fmt(r.p_value) << '\t' << fmt(r.p_ci.first) << '\t'
        << fmt(r.p_ci.second) << '\t' << r.n_trials_effective << '\t'
        << direction_name(r.direction) << '\t' << fmt(r.alpha) << '\t'
        << sidedness_name(r.sided) << '\n';
  } else if (std::holds_alternative<SweepResult>(doc.payload)) {
    const auto& r = std::get<SweepResult>(doc.payload);
    out << "tau\tdelta_fpr\tthreshold_fpr\tp_fpr\tdetected_fpr\tskipped_fpr\t"
           "delta_recall\tthreshold_recall\tp_recall\tdetected_recall\t"
           "skipped_recall\n";
    for (const EoSweepRow& row : r.rows) {
      out << fmt(row.tau) << '\t' << fmt(row.fpr.delta) << '\t'
          << fmt(row.fpr.threshold) << '\t' << fmt(row.fpr.p_value) << '\t'
          << row.fpr.detected << '\t' << row.fpr.skipped << '\t'
          << fmt(row.recall.delta) << '\t' << fmt(row.recall.threshold) << '\t'
          << fmt(row.recall.p_value) << '\t' << row.recall.detected << '\t'
          << row.recall.skipped << '\n';
    }
  } else if (std::holds_alternative<StudyResult>(doc.payload)) {
    const auto& r = std::get<StudyResult>(doc.payload);
    out << "rejection_probability\tci_lower\tci_upper\tn_sims\tn_errored";
    for (int k = 1; k <= 10; ++k) out << "\tdecile_" << k;
    out << '\n';
    out << fmt(r.rejection_probability) << '\t' << fmt(r.rejection_ci.first)
        << '\t' << fmt(r.rejection_ci.second) << '\t' << r.n_sims_completed
        << '\t' << r.n_errored;
    for (const double mass : r.p_histogram) out << '\t' << fmt(mass);
    out << '\n';
  } else {
    const auto& r = std::get<PowerResult>(doc.payload);
    out << "target_difference\tper_unit_variance\tn_per_group\tn_total\t"
           "note\n";
    out << fmt(r.target_difference) << '\t' << fmt(r.per_unit_variance)
        << '\t' << r.n_per_group << '\t' << 2 * r.n_per_group << '\t'
        << tsv_escape(r.note) << '\n';
  }
  return out.str();
}

}  // namespace fairperm
