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

#include "mldebias/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mldebias/config.hpp"
#include "mldebias/dataset.hpp"
#include "mldebias/digest.hpp"
#include "mldebias/error.hpp"
#include "mldebias/metrics.hpp"
#include "mldebias/parallel.hpp"
#include "mldebias/protocol.hpp"
#include "mldebias/report.hpp"
#include "mldebias/transcript_io.hpp"

namespace mldebias::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kToolVersion = "0.1.0";

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", round_to(v, 3) == 0.0 ? 0.0 : v);
  return buf;
}

// A directory holds the nine upstream files; a file is either a saved
// question set or a single BBQ record file. Either way only ambiguous items
// are kept.
QuestionSet load_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("dataset path does not exist: " + path.string());
  if (fs::is_directory(path)) {
    const auto files = bbq_files_in(path);
    return load_bbq(files, ContextFilter::kAmbiguous);
  }
  if (is_question_set_file(path)) {
    QuestionSet qs = read_question_set(path);
    std::erase_if(qs.questions, [](const Question& q) {
      return q.context_condition != ContextCondition::kAmbiguous;
    });
    qs.source_digest = content_digest(qs.questions, qs.provenance);
    return qs;
  }
  const std::vector<fs::path> one{path};
  return load_bbq(one, ContextFilter::kAmbiguous);
}

QuestionSet load_bbq_paths(const std::vector<std::string>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw ConfigError("dataset path does not exist: " + p);
    if (fs::is_directory(p)) {
      for (auto& f : bbq_files_in(p)) files.push_back(std::move(f));
    } else {
      files.emplace_back(p);
    }
  }
  return load_bbq(files, ContextFilter::kAmbiguous);
}

void filter_groups(QuestionSet& qs, const std::vector<SocialGroup>& groups) {
  if (groups.empty()) return;
  std::erase_if(qs.questions, [&](const Question& q) {
    return std::find(groups.begin(), groups.end(), q.category) == groups.end();
  });
  qs.source_digest = content_digest(qs.questions, qs.provenance);
}

// --- extract-hard ----------------------------------------------------------

struct ExtractHardArgs {
  std::vector<std::string> bbq;
  std::string backend;
  std::string config;
  std::string script;
  std::string out;
  std::string cache_dir;
  std::string base_instruction_file;
  int parallelism = 4;
  int queries = 1;
  double temperature = 1.0;
};

int cmd_extract_hard(const ExtractHardArgs& a, bool temperature_given, std::ostream& out) {
  ModelEntry entry;
  if (!a.config.empty()) {
    const RunConfig cfg = load_run_config(a.config);
    auto it = std::find_if(cfg.models.begin(), cfg.models.end(),
                           [&](const ModelEntry& m) { return m.spec.name == a.backend; });
    if (it == cfg.models.end()) {
      throw ConfigError("backend '" + a.backend + "' is not defined in " + a.config);
    }
    entry = *it;
  } else if (!a.script.empty()) {
    entry.spec.name = a.backend;
    entry.spec.kind = BackendKind::kScripted;
    entry.spec.model_id = "scripted:" + a.backend;
    entry.script = a.script;
  } else {
    throw ConfigError("extract-hard needs --config or --script to define the backend");
  }
  if (!a.script.empty() && entry.spec.kind == BackendKind::kScripted) entry.script = a.script;
  if (temperature_given) entry.spec.temperature = a.temperature;

  QuestionSet qs = load_bbq_paths(a.bbq);
  const BackendPtr backend = make_model_backend(entry, a.cache_dir);

  HardFilterOptions options;
  options.parallelism = a.parallelism;
  options.queries_per_question = a.queries;
  if (!a.base_instruction_file.empty()) {
    options.base_instruction = read_file(a.base_instruction_file);
  }
  const HardFilterResult result = extract_hard(qs, *backend, options);
  write_question_set(result.hard, a.out);

  const auto before = qs.group_counts();
  const auto after = result.hard.group_counts();
  std::size_t total_before = 0;
  std::size_t total_after = 0;
  for (SocialGroup g : kAllGroups) {
    const std::size_t b = before.contains(g) ? before.at(g) : 0;
    const std::size_t h = after.contains(g) ? after.at(g) : 0;
    total_before += b;
    total_after += h;
    out << display_name(g) << ": " << h << " of " << b << '\n';
  }
  out << "Total: " << total_after << " of " << total_before << '\n';
  if (!result.extraction_failures.empty()) {
    out << "Kept without an extractable answer: " << result.extraction_failures.size() << '\n';
  }
  return kOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string dataset;
  std::vector<std::string> groups;
  std::string topology;
  std::vector<std::string> models;
  std::vector<std::string> scripts;  // NAME=PATH
  int rounds = 3;
  std::string variant;
  std::uint64_t seed = 0;
  std::size_t subset_size = 0;
  std::string cache_dir;
  std::string output_dir;
  std::string run_name;
  int parallelism = 4;
  bool chain_leaves = false;
  bool parallel_calls = false;
  bool print_config = false;
};

RunConfig effective_config(const RunArgs& a, const CLI::App& sub) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  const auto given = [&](const char* opt) { return sub.count(opt) > 0; };

  if (given("--dataset")) cfg.dataset = a.dataset;
  if (given("--groups")) {
    cfg.groups.clear();
    for (const auto& g : a.groups) {
      try {
        cfg.groups.push_back(parse_social_group(g));
      } catch (const ParseError& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (given("--topology")) {
    cfg.topology = parse_topology(a.topology);
    if (!given("--rounds") && cfg.topology == Topology::kBaseline) cfg.rounds = 1;
  }
  if (given("--models")) {
    std::vector<ModelEntry> selected;
    for (const auto& name : a.models) {
      auto it = std::find_if(cfg.models.begin(), cfg.models.end(),
                             [&](const ModelEntry& m) { return m.spec.name == name; });
      if (it == cfg.models.end()) {
        // Undefined names become scripted models; --script must supply them.
        ModelEntry e;
        e.spec.name = name;
        e.spec.kind = BackendKind::kScripted;
        e.spec.model_id = "scripted:" + name;
        selected.push_back(std::move(e));
      } else {
        selected.push_back(*it);
      }
    }
    cfg.models = std::move(selected);
  }
  for (const auto& s : a.scripts) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--script expects NAME=PATH, got '" + s + "'");
    const std::string name = s.substr(0, eq);
    auto it = std::find_if(cfg.models.begin(), cfg.models.end(),
                           [&](const ModelEntry& m) { return m.spec.name == name; });
    if (it == cfg.models.end()) throw ConfigError("--script for unknown model '" + name + "'");
    it->spec.kind = BackendKind::kScripted;
    if (it->spec.model_id.empty()) it->spec.model_id = "scripted:" + name;
    it->script = s.substr(eq + 1);
  }
  if (given("--rounds")) cfg.rounds = a.rounds;
  if (given("--variant")) cfg.variant = parse_prompt_variant(a.variant);
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--subset-size")) cfg.subset_size = a.subset_size;
  if (given("--cache-dir")) cfg.cache_dir = a.cache_dir;
  if (given("--output-dir")) cfg.output_dir = a.output_dir;
  if (given("--run-name")) cfg.run_name = a.run_name;
  if (given("--parallelism")) cfg.parallelism = a.parallelism;
  if (given("--chain-leaves")) cfg.chain_leaves = a.chain_leaves;
  if (given("--parallel-calls")) cfg.parallel_calls = a.parallel_calls;
  if (cfg.run_name.empty()) cfg.run_name = std::string(to_string(cfg.topology));
  return cfg;
}

int cmd_run(const RunArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = effective_config(a, sub);
  const std::string config_text = dump_run_config(cfg);
  if (a.print_config) {
    out << config_text;
    return kOk;
  }
  validate(cfg);

  QuestionSet qs = load_dataset(cfg.dataset);
  filter_groups(qs, cfg.groups);
  const ProtocolConfig protocol = make_protocol_config(cfg);

  const std::string started = utc_now();
  std::vector<Transcript> transcripts(qs.questions.size());
  parallel_for(qs.questions.size(), cfg.parallelism, [&](std::size_t i) {
    transcripts[i] = run_protocol(qs.questions[i], protocol, cfg.topology);
  });

  const fs::path run_dir = cfg.output_dir / cfg.run_name;
  write_file(run_dir / "config.json", config_text);
  write_transcripts(transcripts, run_dir / "transcripts.jsonl");

  std::size_t aborted = 0;
  for (const auto& t : transcripts) {
    if (t.aborted()) {
      if (aborted == 0) err << "backend failure on '" << t.question_id << "': " << *t.error << '\n';
      ++aborted;
    }
  }

  json manifest = {{"tool_version", kToolVersion},
                   {"run_name", cfg.run_name},
                   {"topology", to_string(cfg.topology)},
                   {"variant", to_string(cfg.variant)},
                   {"max_rounds", cfg.rounds},
                   {"config_digest", sha256_hex(config_text)},
                   {"dataset_digest", qs.source_digest},
                   {"question_count", qs.questions.size()},
                   {"aborted", aborted},
                   {"started_at", started},
                   {"finished_at", utc_now()}};
  json names = json::array();
  for (const auto& m : cfg.models) names.push_back(m.spec.name);
  manifest["models"] = std::move(names);

  if (aborted > 0) {
    write_file(run_dir / "manifest.json", manifest.dump(2) + "\n");
    err << aborted << " question(s) aborted; rerun with the same cache to resume\n";
    return kBackend;
  }

  std::vector<Outcome> outcomes;
  outcomes.reserve(transcripts.size());
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    outcomes.push_back(score_outcome(transcripts[i], qs.questions[i]));
  }
  write_outcomes(outcomes, run_dir / "outcomes.jsonl");
  write_file(run_dir / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& gm : metrics_by_group(outcomes)) {
    out << display_name(gm.group) << ": n=" << gm.n << " acc=" << fixed3(gm.acc)
        << " bias=" << fixed3(gm.bias) << " rounds=";
    for (int r = 1; r <= cfg.rounds; ++r) {
      out << (r > 1 ? "/" : "") << (gm.round_counts.contains(r) ? gm.round_counts.at(r) : 0);
    }
    out << '\n';
  }
  return kOk;
}

// --- report / bootstrap ----------------------------------------------------

RunResult load_run(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("no manifest.json in " + dir.string());
  RunResult run;
  try {
    json m = json::parse(read_file(manifest_path));
    run.method = m.at("run_name").get<std::string>();
    run.max_rounds = m.at("max_rounds").get<int>();
  } catch (const json::exception& ex) {
    throw IoError(manifest_path.string() + ": " + ex.what());
  }
  run.outcomes = read_outcomes(dir / "outcomes.jsonl");
  return run;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string baseline;
  std::string out;
  std::size_t resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  bool group_average = false;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const RunResult baseline = load_run(a.baseline);
  std::vector<RunResult> runs;
  std::error_code ec;
  for (const auto& r : a.runs) {
    if (fs::equivalent(r, a.baseline, ec)) continue;
    runs.push_back(load_run(r));
  }
  ReportOptions options;
  options.resamples = a.resamples;
  options.seed = a.seed;
  options.aggregation =
      a.group_average ? BootstrapAggregation::kGroupAverage : BootstrapAggregation::kPooled;
  const MetricsReport report = build_report(baseline, runs, options);
  write_report(report, a.out);
  out << report_csv(report);
  return kOk;
}

struct BootstrapArgs {
  std::string run;
  std::string out;
  std::size_t resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  bool group_average = false;
};

int cmd_bootstrap(const BootstrapArgs& a, std::ostream& out) {
  const RunResult run = load_run(a.run);
  const BootstrapResult b = bootstrap_bias(
      run.outcomes, a.resamples, a.seed,
      a.group_average ? BootstrapAggregation::kGroupAverage : BootstrapAggregation::kPooled);
  std::string content = "score\n";
  char buf[32];
  for (double s : b.scores) {
    std::snprintf(buf, sizeof buf, "%.6f\n", s == 0.0 ? 0.0 : s);
    content += buf;
  }
  write_file(a.out, content);

  std::vector<double> sorted = b.scores;
  std::sort(sorted.begin(), sorted.end());
  const auto pct = [&](double p) {
    const auto idx = static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1));
    return sorted[idx];
  };
  double mean = 0.0;
  for (double s : sorted) mean += s;
  mean /= static_cast<double>(sorted.size());
  out << "point_estimate=" << fixed3(b.point_estimate) << " mean=" << fixed3(mean)
      << " p2.5=" << fixed3(pct(0.025)) << " p97.5=" << fixed3(pct(0.975)) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-LLM debiasing protocols and BBQ bias evaluation"};
  app.name(args.empty() ? "mldebias" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  ExtractHardArgs eh;
  auto* extract = app.add_subcommand("extract-hard", "Build the hard subset of BBQ ambiguous questions");
  extract->add_option("--bbq", eh.bbq, "BBQ directory or record files")->required();
  extract->add_option("--backend", eh.backend, "Filter model name")->required();
  extract->add_option("--out", eh.out, "Output question-set file")->required();
  extract->add_option("--config", eh.config, "Config file defining models");
  extract->add_option("--script", eh.script, "Script file for a scripted filter model");
  extract->add_option("--cache-dir", eh.cache_dir, "Response cache directory");
  extract->add_option("--parallelism", eh.parallelism, "Questions in flight")->check(CLI::PositiveNumber);
  extract->add_option("--queries", eh.queries, "Queries per question")->check(CLI::PositiveNumber);
  extract->add_option("--temperature", eh.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);
  extract->add_option("--base-instruction-file", eh.base_instruction_file,
                      "System instruction used while filtering");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run baseline, centralized, or decentralized debiasing");
  run_cmd->add_option("--config", ra.config, "Run config file (flags override it)");
  run_cmd->add_option("--dataset", ra.dataset, "BBQ directory, record file, or question set");
  run_cmd->add_option("--groups", ra.groups, "Restrict to these social groups")->delimiter(',');
  run_cmd->add_option("--topology", ra.topology, "baseline | centralized | decentralized");
  run_cmd->add_option("--models", ra.models, "Model names in order, M1 first")->delimiter(',');
  run_cmd->add_option("--script", ra.scripts, "NAME=PATH script for a scripted model");
  run_cmd->add_option("--rounds", ra.rounds, "Maximum rounds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--variant", ra.variant, "Prompt variant");
  run_cmd->add_option("--seed", ra.seed, "Seed for subset selection");
  run_cmd->add_option("--subset-size", ra.subset_size, "Leaves consulted per round (centralized)");
  run_cmd->add_option("--cache-dir", ra.cache_dir, "Response cache directory");
  run_cmd->add_option("--output-dir", ra.output_dir, "Root directory for run outputs");
  run_cmd->add_option("--run-name", ra.run_name, "Run directory name and method label");
  run_cmd->add_option("--parallelism", ra.parallelism, "Questions in flight")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--chain-leaves", ra.chain_leaves, "Leaves answer in sequence");
  run_cmd->add_flag("--parallel-calls", ra.parallel_calls, "Concurrent model calls within a round");
  run_cmd->add_flag("--print-config", ra.print_config, "Print the effective config and exit");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Per-group bias, accuracy, improvement and rounds");
  report_cmd->add_option("--run", rp.runs, "Run directory (repeatable)");
  report_cmd->add_option("--baseline", rp.baseline, "Baseline run directory")->required();
  report_cmd->add_option("--out", rp.out, "Output directory")->required();
  report_cmd->add_option("--resamples", rp.resamples, "Bootstrap resamples (0 = off)");
  report_cmd->add_option("--seed", rp.seed, "Bootstrap seed");
  report_cmd->add_flag("--group-average", rp.group_average, "Bootstrap the mean of group scores");

  BootstrapArgs bs;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrapped bias-score distribution of a run");
  boot_cmd->add_option("--run", bs.run, "Run directory")->required();
  boot_cmd->add_option("--out", bs.out, "Output CSV, one score per line")->required();
  boot_cmd->add_option("--resamples", bs.resamples, "Resamples")->check(CLI::PositiveNumber);
  boot_cmd->add_option("--seed", bs.seed, "Seed");
  boot_cmd->add_flag("--group-average", bs.group_average, "Mean of per-group scores");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (extract->parsed()) return cmd_extract_hard(eh, extract->count("--temperature") > 0, out);
    if (run_cmd->parsed()) return cmd_run(ra, *run_cmd, out, err);
    if (report_cmd->parsed()) return cmd_report(rp, out);
    if (boot_cmd->parsed()) return cmd_bootstrap(bs, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return kBackend;
  } catch (const DataMismatchError& e) {
    err << "data mismatch: " << e.what() << '\n';
    return kDataMismatch;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  }
  return kConfig;
}

}  // namespace mldebias::cli
