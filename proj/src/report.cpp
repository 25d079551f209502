// Copyright 2026 The mldebias Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mldebias/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "mldebias/error.hpp"
#include "mldebias/transcript_io.hpp"

namespace mldebias {

using json = nlohmann::json;

namespace {

std::string fixed(double v, int decimals) {
  // -0.000 reads badly in tables.
  v = round_to(v, decimals);
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::set<std::string> ids_of(const RunResult& run) {
  std::set<std::string> ids;
  for (const auto& o : run.outcomes) {
    if (!ids.insert(o.question_id).second) {
      throw DataMismatchError("run '" + run.method + "' has duplicate outcome for '" +
                              o.question_id + "'");
    }
  }
  return ids;
}

}  // namespace

MetricsReport build_report(const RunResult& baseline, std::span<const RunResult> runs,
                           const ReportOptions& options) {
  std::vector<const RunResult*> all{&baseline};
  for (const auto& r : runs) all.push_back(&r);

  std::set<std::string> methods;
  const std::set<std::string> baseline_ids = ids_of(baseline);
  if (baseline_ids.empty()) throw DataMismatchError("baseline run has no outcomes");
  for (const RunResult* run : all) {
    if (!methods.insert(run->method).second) {
      throw ConfigError("duplicate method label '" + run->method + "' in report");
    }
    if (ids_of(*run) != baseline_ids) {
      throw DataMismatchError("run '" + run->method +
                              "' covers a different question set than baseline '" +
                              baseline.method + "'");
    }
  }

  MetricsReport report;
  report.baseline_method = baseline.method;

  std::vector<std::vector<GroupMetrics>> per_run;
  for (const RunResult* run : all) per_run.push_back(metrics_by_group(run->outcomes));

  for (SocialGroup g : kAllGroups) {
    const auto find = [&](const std::vector<GroupMetrics>& ms) -> const GroupMetrics* {
      for (const auto& m : ms) {
        if (m.group == g) return &m;
      }
      return nullptr;
    };
    const GroupMetrics* base = find(per_run.front());
    if (base == nullptr) continue;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const GroupMetrics* gm = find(per_run[i]);
      if (gm == nullptr) {
        throw DataMismatchError("run '" + all[i]->method + "' has no outcomes for group " +
                                std::string(display_name(g)));
      }
      ReportRow row;
      row.group = g;
      row.method = all[i]->method;
      row.bias = gm->bias;
      row.acc = gm->acc;
      row.improvement = improvement(base->bias, gm->bias);
      row.n = gm->n;
      row.n_biased = gm->n_biased;
      row.m = gm->m;
      report.rows.push_back(std::move(row));
    }
  }

  for (const RunResult* run : all) {
    const auto hist = round_histogram_by_group(run->outcomes, run->max_rounds);
    for (const auto& [g, h] : hist) {
      const auto pct = h.percentages();
      for (int r = 1; r <= h.max_rounds; ++r) {
        const auto idx = static_cast<std::size_t>(r - 1);
        report.rounds.push_back({g, run->method, r, h.counts[idx], pct[idx], h.total});
      }
    }
  }
  // round_histogram_by_group is keyed by enum, so sort back to group-major.
  std::stable_sort(report.rounds.begin(), report.rounds.end(),
                   [](const RoundsRow& a, const RoundsRow& b) { return a.group < b.group; });

  if (options.resamples > 0) {
    for (const RunResult* run : all) {
      report.bootstrap.push_back(
          {run->method,
           bootstrap_bias(run->outcomes, options.resamples, options.seed, options.aggregation)});
    }
  }
  return report;
}

std::string report_csv(const MetricsReport& r) {
  std::string out = "group,method,bias,acc,improvement,n\n";
  for (const auto& row : r.rows) {
    out += csv_field(display_name(row.group)) + ',' + csv_field(row.method) + ',' +
           fixed(row.bias, 3) + ',' + fixed(row.acc, 3) + ',' +
           (row.improvement ? fixed(*row.improvement, 1) : std::string("NA")) + ',' +
           std::to_string(row.n) + '\n';
  }
  return out;
}

std::string rounds_csv(const MetricsReport& r) {
  std::string out = "group,method,round,count,percent,total\n";
  for (const auto& row : r.rounds) {
    out += csv_field(display_name(row.group)) + ',' + csv_field(row.method) + ',' +
           std::to_string(row.round) + ',' + std::to_string(row.count) + ',' +
           fixed(row.percent, 1) + ',' + std::to_string(row.total) + '\n';
  }
  return out;
}

std::string bootstrap_csv(const MetricsReport& r) {
  std::string out = "method,score\n";
  for (const auto& b : r.bootstrap) {
    for (double s : b.result.scores) out += csv_field(b.method) + ',' + fixed(s, 6) + '\n';
  }
  return out;
}

std::string report_json(const MetricsReport& r) {
  // Numbers are emitted as the same rounded values the CSVs carry.
  auto num = [](double v, int d) { return json::parse(fixed(v, d)); };
  json groups = json::array();
  for (const auto& row : r.rows) {
    groups.push_back({{"group", display_name(row.group)},
                      {"method", row.method},
                      {"bias", num(row.bias, 3)},
                      {"acc", num(row.acc, 3)},
                      {"improvement", row.improvement ? num(*row.improvement, 1) : json(nullptr)},
                      {"n", row.n},
                      {"n_biased", row.n_biased},
                      {"m", row.m}});
  }
  json rounds = json::array();
  for (const auto& row : r.rounds) {
    rounds.push_back({{"group", display_name(row.group)},
                      {"method", row.method},
                      {"round", row.round},
                      {"count", row.count},
                      {"percent", num(row.percent, 1)},
                      {"total", row.total}});
  }
  json boot = json::array();
  for (const auto& b : r.bootstrap) {
    const auto& s = b.result.scores;
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= static_cast<double>(s.size() > 1 ? s.size() - 1 : 1);
    boot.push_back({{"method", b.method},
                    {"resamples", b.result.resamples},
                    {"seed", b.result.seed},
                    {"point_estimate", num(b.result.point_estimate, 6)},
                    {"mean", num(mean, 6)},
                    {"std", num(std::sqrt(var), 6)}});
  }
  json doc = {{"baseline", r.baseline_method},
              {"groups", std::move(groups)},
              {"rounds", std::move(rounds)},
              {"bootstrap", std::move(boot)}};
  return doc.dump(2) + "\n";
}

void write_report(const MetricsReport& r, const std::filesystem::path& dir) {
  write_file(dir / "report.csv", report_csv(r));
  write_file(dir / "rounds.csv", rounds_csv(r));
  write_file(dir / "bootstrap.csv", bootstrap_csv(r));
  write_file(dir / "report.json", report_json(r));
}

}  // namespace mldebias
