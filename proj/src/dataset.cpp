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

#include "mldebias/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "mldebias/error.hpp"
#include "mldebias/extract.hpp"
#include "mldebias/parallel.hpp"
#include "mldebias/prompts.hpp"

namespace mldebias {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kHeaderType = "question_set";
constexpr int kFormatVersion = 1;

std::string alnum_lower(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// Folds the several spellings BBQ uses for the same group onto one token.
std::string canonical_group(std::string_view s) {
  static const std::set<std::string> kFemale = {"f", "woman", "women", "girl", "girls",
                                                "female"};
  static const std::set<std::string> kMale = {"m", "man", "men", "boy", "boys", "male"};
  std::string n = alnum_lower(s);
  if (kFemale.contains(n)) return "f";
  if (kMale.contains(n)) return "m";
  return n;
}

std::set<std::string> choice_group_tokens(const json& info) {
  std::set<std::string> tokens;
  for (const auto& item : info) {
    if (!item.is_string()) continue;
    const std::string s = item.get<std::string>();
    tokens.insert(canonical_group(s));
    // "F-Black" / "M-Latino": gender prefix on race labels.
    if (s.size() > 2 && (s[0] == 'F' || s[0] == 'M') && s[1] == '-') {
      tokens.insert(canonical_group(s.substr(2)));
    }
  }
  tokens.erase("");
  return tokens;
}

const json& require(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end()) {
    throw ParseError(std::string("record missing required field '") + field + "'");
  }
  return *it;
}

std::string require_string(const json& rec, const char* field) {
  const json& v = require(rec, field);
  if (!v.is_string()) throw ParseError(std::string("field '") + field + "' is not a string");
  return v.get<std::string>();
}

std::size_t require_index(const json& v, const char* field) {
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 2) {
    throw ParseError(std::string("field '") + field + "' is not a choice index 0..2");
  }
  return v.get<std::size_t>();
}

std::string id_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError("field 'example_id' is neither a string nor an integer");
}

// Stereotype target per BBQ's scoring convention: for negative questions the
// answer naming a stereotyped group; for non-negative questions the other
// non-unknown answer. Absent unless exactly one non-unknown answer matches.
std::optional<std::size_t> derive_target(const json& answer_info, const json& metadata,
                                         std::size_t unknown_index, Polarity polarity) {
  auto groups_it = metadata.find("stereotyped_groups");
  if (groups_it == metadata.end() || !groups_it->is_array()) return std::nullopt;
  std::set<std::string> stereotyped;
  for (const auto& g : *groups_it) {
    if (g.is_string()) stereotyped.insert(canonical_group(g.get<std::string>()));
  }
  std::vector<std::size_t> matches;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i == unknown_index) continue;
    const auto tokens = choice_group_tokens(answer_info.at("ans" + std::to_string(i)));
    const bool hit = std::any_of(tokens.begin(), tokens.end(),
                                 [&](const std::string& t) { return stereotyped.contains(t); });
    (hit ? matches : others).push_back(i);
  }
  if (matches.size() != 1) return std::nullopt;
  return polarity == Polarity::kNegative ? matches.front() : others.front();
}

}  // namespace

Question parse_bbq_record(std::string_view line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& ex) {
    throw ParseError(std::string("invalid JSON: ") + ex.what());
  }
  if (!rec.is_object()) throw ParseError("record is not a JSON object");

  Question q;
  const std::string example_id = id_text(require(rec, "example_id"));
  q.category = parse_social_group(require_string(rec, "category"));

  const std::string condition = require_string(rec, "context_condition");
  if (condition == "ambig") {
    q.context_condition = ContextCondition::kAmbiguous;
  } else if (condition == "disambig") {
    q.context_condition = ContextCondition::kDisambiguated;
  } else {
    throw ParseError("unknown context_condition '" + condition + "'");
  }
  const std::string polarity = require_string(rec, "question_polarity");
  if (polarity == "neg") {
    q.polarity = Polarity::kNegative;
  } else if (polarity == "nonneg") {
    q.polarity = Polarity::kNonNegative;
  } else {
    throw ParseError("unknown question_polarity '" + polarity + "'");
  }
  q.context = require_string(rec, "context");
  q.question = require_string(rec, "question");
  q.choices = {require_string(rec, "ans0"), require_string(rec, "ans1"),
               require_string(rec, "ans2")};
  q.correct_index = require_index(require(rec, "label"), "label");

  if (auto it = rec.find("id"); it != rec.end()) {
    q.id = id_text(*it);
  } else {
    q.id = std::string(upstream_category(q.category)) + "-" + example_id;
  }

  const json& answer_info = require(rec, "answer_info");
  if (auto it = rec.find("unknown_index"); it != rec.end()) {
    q.unknown_index = require_index(*it, "unknown_index");
  } else {
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string key = "ans" + std::to_string(i);
      if (!answer_info.contains(key) || !answer_info[key].is_array()) {
        throw ParseError("answer_info lacks '" + key + "'");
      }
      for (const auto& item : answer_info[key]) {
        if (item.is_string() && alnum_lower(item.get<std::string>()) == "unknown") {
          unknown.push_back(i);
          break;
        }
      }
    }
    if (unknown.empty()) throw ParseError("no choice marked unknown");
    if (unknown.size() > 1) throw ParseError("more than one choice marked unknown");
    q.unknown_index = unknown.front();
  }

  if (auto it = rec.find("target_index"); it != rec.end()) {
    if (!it->is_null()) q.target_index = require_index(*it, "target_index");
  } else {
    q.target_index = derive_target(answer_info, require(rec, "additional_metadata"),
                                   q.unknown_index, q.polarity);
  }

  validate(q);
  return q;
}

std::string to_bbq_record(const Question& q) {
  json answer_info = json::object();
  for (std::size_t i = 0; i < 3; ++i) {
    std::string role = i == q.unknown_index                      ? "unknown"
                       : (q.target_index && *q.target_index == i) ? "target"
                                                                  : "nontarget";
    answer_info["ans" + std::to_string(i)] = json::array({q.choices[i], role});
  }
  json rec = {
      {"id", q.id},
      {"example_id", q.id},
      {"category", upstream_category(q.category)},
      {"context_condition", to_string(q.context_condition)},
      {"question_polarity", to_string(q.polarity)},
      {"context", q.context},
      {"question", q.question},
      {"ans0", q.choices[0]},
      {"ans1", q.choices[1]},
      {"ans2", q.choices[2]},
      {"label", q.correct_index},
      {"answer_info", std::move(answer_info)},
      {"additional_metadata", json::object()},
      {"unknown_index", q.unknown_index},
      {"target_index", q.target_index ? json(*q.target_index) : json(nullptr)},
  };
  return rec.dump();
}

std::vector<fs::path> bbq_files_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (SocialGroup g : kAllGroups) {
    fs::path p = dir / (std::string(upstream_category(g)) + ".jsonl");
    if (!fs::is_regular_file(p)) throw IoError("missing BBQ file " + p.string());
    files.push_back(std::move(p));
  }
  return files;
}

QuestionSet load_bbq(std::span<const fs::path> paths, ContextFilter keep) {
  QuestionSet qs;
  qs.provenance = keep == ContextFilter::kAmbiguous ? Provenance::kBbqAmbiguous
                                                    : Provenance::kBbqFull;
  std::unordered_set<std::string> seen;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (std::all_of(line.begin(), line.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; })) {
        continue;
      }
      Question q;
      try {
        q = parse_bbq_record(line);
      } catch (const ParseError& e) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      const bool wanted =
          keep == ContextFilter::kAll ||
          (keep == ContextFilter::kAmbiguous) ==
              (q.context_condition == ContextCondition::kAmbiguous);
      if (!wanted) continue;
      if (!seen.insert(q.id).second) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": duplicate question id '" + q.id + "'");
      }
      qs.questions.push_back(std::move(q));
    }
    if (in.bad()) throw IoError("read error on " + path.string());
  }
  qs.source_digest = content_digest(qs.questions, qs.provenance);
  return qs;
}

HardFilterResult extract_hard(const QuestionSet& qs, const Backend& filter_backend,
                              const HardFilterOptions& options) {
  if (options.queries_per_question < 1) {
    throw ConfigError("hard filtering needs at least one query per question");
  }
  const std::string instruction = options.base_instruction.empty()
                                      ? std::string(default_base_instruction())
                                      : options.base_instruction;

  struct Verdict {
    bool hard = false;
    bool extraction_failed = false;
  };
  std::vector<Verdict> verdicts(qs.questions.size());

  parallel_for(qs.questions.size(), options.parallelism, [&](std::size_t i) {
    const Question& q = qs.questions[i];
    std::vector<ChatMessage> messages{ChatMessage{Role::kSystem, instruction}};
    for (auto& m : render_baseline_prompt(q, /*weighted=*/false)) messages.push_back(m);
    for (int query = 1; query <= options.queries_per_question; ++query) {
      const CompletionRecord rec = complete(
          filter_backend, messages, RequestTag{q.id, query, filter_backend.spec().name});
      const auto answer = extract_answer(rec.response_text, q);
      if (!answer) {
        verdicts[i].extraction_failed = true;
        verdicts[i].hard = true;
      } else if (index_of(*answer) != q.correct_index) {
        verdicts[i].hard = true;
      }
    }
  });

  HardFilterResult result;
  result.hard.provenance = Provenance::kBbqHard;
  for (std::size_t i = 0; i < qs.questions.size(); ++i) {
    if (!verdicts[i].hard) continue;
    result.hard.questions.push_back(qs.questions[i]);
    if (verdicts[i].extraction_failed) {
      result.extraction_failures.push_back(qs.questions[i].id);
    }
  }
  result.hard.source_digest = content_digest(result.hard.questions, result.hard.provenance);
  return result;
}

void write_question_set(const QuestionSet& qs, const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  json header = {{"record_type", kHeaderType},
                 {"format_version", kFormatVersion},
                 {"provenance", to_string(qs.provenance)},
                 {"digest", qs.source_digest},
                 {"count", qs.questions.size()}};
  out << header.dump() << '\n';
  for (const auto& q : qs.questions) out << to_bbq_record(q) << '\n';
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

bool is_question_set_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string first;
  if (!in || !std::getline(in, first)) return false;
  try {
    json h = json::parse(first);
    return h.is_object() && h.value("record_type", "") == kHeaderType;
  } catch (const json::exception&) {
    return false;
  }
}

QuestionSet read_question_set(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty question-set file");

  QuestionSet qs;
  std::size_t expected_count = 0;
  try {
    json header = json::parse(line);
    if (header.value("record_type", "") != kHeaderType) {
      throw IoError(path.string() + ": missing question-set header");
    }
    if (header.at("format_version").get<int>() != kFormatVersion) {
      throw IoError(path.string() + ": unsupported format version");
    }
    qs.provenance = parse_provenance(header.at("provenance").get<std::string>());
    qs.source_digest = header.at("digest").get<std::string>();
    expected_count = header.at("count").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw IoError(path.string() + ": bad header: " + ex.what());
  } catch (const ParseError& ex) {
    throw IoError(path.string() + ": bad header: " + ex.what());
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      qs.questions.push_back(parse_bbq_record(line));
    } catch (const ParseError& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": corrupt record: " +
                    e.what());
    }
  }
  if (qs.questions.size() != expected_count) {
    throw IoError(path.string() + ": record count does not match header (corrupt file)");
  }
  if (content_digest(qs.questions, qs.provenance) != qs.source_digest) {
    throw IoError(path.string() + ": digest mismatch (corrupt file)");
  }
  return qs;
}

}  // namespace mldebias
