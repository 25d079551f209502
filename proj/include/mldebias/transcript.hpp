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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mldebias/question.hpp"

namespace mldebias {

enum class Topology { kBaseline, kCentralized, kDecentralized };

std::string_view to_string(Topology t);
Topology parse_topology(std::string_view s);

enum class FinalSource { kConvergence, kCentralLatest, kMajorityVote, kWeightedVote, kUnresolved };

std::string_view to_string(FinalSource s);
FinalSource parse_final_source(std::string_view s);

// One model reply within a conversation.
struct ModelTurn {
  std::string model;
  int round = 1;
  std::string raw_text;
  std::optional<Letter> extracted_answer;
  std::optional<int> confidence;  // 1..7, weighted variants only

  bool operator==(const ModelTurn&) const = default;
};

// The whole conversation for one question. Turns are grouped by round,
// rounds contiguous from 1.
struct Transcript {
  std::string question_id;
  Topology topology = Topology::kBaseline;
  std::vector<ModelTurn> turns;
  int rounds_used = 0;
  bool converged = false;
  std::optional<Letter> final_answer;
  FinalSource final_source = FinalSource::kUnresolved;
  // Set when a backend failed terminally; turns completed so far are kept.
  std::optional<std::string> error;

  bool operator==(const Transcript&) const = default;

  bool aborted() const { return error.has_value(); }
  std::vector<ModelTurn> turns_in_round(int round) const;
};

}  // namespace mldebias
