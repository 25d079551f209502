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

#include "mldebias/transcript_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mldebias/error.hpp"

namespace mldebias {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::kBaseline: return "baseline";
    case Topology::kCentralized: return "centralized";
    case Topology::kDecentralized: return "decentralized";
  }
  return "baseline";
}

Topology parse_topology(std::string_view s) {
  if (s == "baseline") return Topology::kBaseline;
  if (s == "centralized") return Topology::kCentralized;
  if (s == "decentralized") return Topology::kDecentralized;
  throw ConfigError("unknown topology: '" + std::string(s) + "'");
}

std::string_view to_string(FinalSource s) {
  switch (s) {
    case FinalSource::kConvergence: return "convergence";
    case FinalSource::kCentralLatest: return "central_latest";
    case FinalSource::kMajorityVote: return "majority_vote";
    case FinalSource::kWeightedVote: return "weighted_vote";
    case FinalSource::kUnresolved: return "unresolved";
  }
  return "unresolved";
}

FinalSource parse_final_source(std::string_view s) {
  for (auto v : {FinalSource::kConvergence, FinalSource::kCentralLatest,
                 FinalSource::kMajorityVote, FinalSource::kWeightedVote,
                 FinalSource::kUnresolved}) {
    if (s == to_string(v)) return v;
  }
  throw ParseError("unknown final_source: '" + std::string(s) + "'");
}

std::vector<ModelTurn> Transcript::turns_in_round(int round) const {
  std::vector<ModelTurn> out;
  for (const auto& t : turns) {
    if (t.round == round) out.push_back(t);
  }
  return out;
}

namespace {

json letter_json(const std::optional<Letter>& l) {
  return l ? json(std::string(1, to_char(*l))) : json(nullptr);
}

std::optional<Letter> letter_from(const json& v) {
  if (v.is_null()) return std::nullopt;
  auto l = parse_letter(v.get<std::string>());
  if (!l) throw ParseError("bad answer letter");
  return l;
}

}  // namespace

std::string transcript_to_jsonl(const Transcript& t) {
  std::string out;
  for (const auto& turn : t.turns) {
    json j = {{"type", "turn"},
              {"question_id", t.question_id},
              {"round", turn.round},
              {"model", turn.model},
              {"raw_text", turn.raw_text},
              {"extracted_answer", letter_json(turn.extracted_answer)},
              {"confidence", turn.confidence ? json(*turn.confidence) : json(nullptr)}};
    out += j.dump();
    out += '\n';
  }
  json s = {{"type", "summary"},
            {"question_id", t.question_id},
            {"topology", to_string(t.topology)},
            {"rounds_used", t.rounds_used},
            {"converged", t.converged},
            {"final_answer", letter_json(t.final_answer)},
            {"final_source", to_string(t.final_source)},
            {"error", t.error ? json(*t.error) : json(nullptr)}};
  out += s.dump();
  out += '\n';
  return out;
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_transcripts(std::span<const Transcript> transcripts, const fs::path& path) {
  std::string content;
  for (const auto& t : transcripts) content += transcript_to_jsonl(t);
  write_file(path, content);
}

std::vector<Transcript> read_transcripts(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Transcript> out;
  Transcript current;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      const std::string qid = j.at("question_id").get<std::string>();
      if (current.question_id.empty()) current.question_id = qid;
      if (qid != current.question_id) throw ParseError("turn outside its transcript");
      if (type == "turn") {
        ModelTurn turn;
        turn.model = j.at("model").get<std::string>();
        turn.round = j.at("round").get<int>();
        turn.raw_text = j.at("raw_text").get<std::string>();
        turn.extracted_answer = letter_from(j.at("extracted_answer"));
        if (!j.at("confidence").is_null()) turn.confidence = j.at("confidence").get<int>();
        current.turns.push_back(std::move(turn));
      } else if (type == "summary") {
        current.topology = parse_topology(j.at("topology").get<std::string>());
        current.rounds_used = j.at("rounds_used").get<int>();
        current.converged = j.at("converged").get<bool>();
        current.final_answer = letter_from(j.at("final_answer"));
        current.final_source = parse_final_source(j.at("final_source").get<std::string>());
        if (!j.at("error").is_null()) current.error = j.at("error").get<std::string>();
        out.push_back(std::move(current));
        current = Transcript{};
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    }
  } catch (const json::exception& ex) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
  } catch (const Error& ex) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
  }
  if (!current.turns.empty()) throw IoError(path.string() + ": transcript without summary");
  return out;
}

std::string outcome_to_json(const Outcome& o) {
  json j = {{"question_id", o.question_id},
            {"group", upstream_category(o.group)},
            {"answered", o.answered},
            {"correct", o.correct},
            {"non_unknown", o.non_unknown},
            {"biased_target", o.biased_target},
            {"rounds_used", o.rounds_used},
            {"converged", o.converged}};
  return j.dump();
}

Outcome outcome_from_json(std::string_view line) {
  try {
    json j = json::parse(line);
    Outcome o;
    o.question_id = j.at("question_id").get<std::string>();
    o.group = parse_social_group(j.at("group").get<std::string>());
    o.answered = j.at("answered").get<bool>();
    o.correct = j.at("correct").get<bool>();
    o.non_unknown = j.at("non_unknown").get<bool>();
    o.biased_target = j.at("biased_target").get<bool>();
    o.rounds_used = j.at("rounds_used").get<int>();
    o.converged = j.at("converged").get<bool>();
    return o;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("bad outcome record: ") + ex.what());
  }
}

void write_outcomes(std::span<const Outcome> outcomes, const fs::path& path) {
  std::string content;
  for (const auto& o : outcomes) {
    content += outcome_to_json(o);
    content += '\n';
  }
  write_file(path, content);
}

std::vector<Outcome> read_outcomes(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Outcome> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(outcome_from_json(line));
    } catch (const Error& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mldebias
