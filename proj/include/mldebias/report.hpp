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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mldebias/metrics.hpp"

namespace mldebias {

// Outcomes of one experiment run, labelled by method.
struct RunResult {
  std::string method;
  int max_rounds = 3;
  std::vector<Outcome> outcomes;
};

struct ReportOptions {
  std::size_t resamples = kDefaultResamples;  // 0 disables bootstrapping
  std::uint64_t seed = 0;
  BootstrapAggregation aggregation = BootstrapAggregation::kPooled;
};

struct ReportRow {
  SocialGroup group = SocialGroup::kAge;
  std::string method;
  double bias = 0.0;
  double acc = 0.0;
  std::optional<double> improvement;  // percent vs the baseline run
  std::size_t n = 0;
  std::size_t n_biased = 0;
  std::size_t m = 0;
};

struct RoundsRow {
  SocialGroup group = SocialGroup::kAge;
  std::string method;
  int round = 1;
  std::size_t count = 0;
  double percent = 0.0;
  std::size_t total = 0;
};

struct BootstrapRow {
  std::string method;
  BootstrapResult result;
};

struct MetricsReport {
  std::string baseline_method;
  std::vector<ReportRow> rows;  // group enum order, then baseline, then runs
  std::vector<RoundsRow> rounds;
  std::vector<BootstrapRow> bootstrap;
};

// All runs must cover exactly the baseline's question ids, otherwise
// DataMismatchError. The baseline is reported first; method labels must be
// distinct.
MetricsReport build_report(const RunResult& baseline, std::span<const RunResult> runs,
                           const ReportOptions& options = {});

// Column sets are fixed; see docs/report_format.md.
std::string report_csv(const MetricsReport& r);
std::string rounds_csv(const MetricsReport& r);
std::string bootstrap_csv(const MetricsReport& r);
std::string report_json(const MetricsReport& r);

// report.csv, rounds.csv, bootstrap.csv and report.json under `dir`.
void write_report(const MetricsReport& r, const std::filesystem::path& dir);

}  // namespace mldebias
