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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mldebias/backend.hpp"
#include "mldebias/question.hpp"
#include "mldebias/transcript.hpp"

namespace mldebias {

enum class PromptVariant {
  kBaseline,
  kFollowup,
  kFollowupWeighted,
  kFollowupAlternative,
  kBaselineWeighted,
};

std::string_view to_string(PromptVariant v);
PromptVariant parse_prompt_variant(std::string_view s);
// Weighted variants ask for a 1-7 confidence score alongside the answer.
bool is_weighted(PromptVariant v);

// Safety preamble, also the default instruction for hard-instance filtering.
std::string_view default_base_instruction();

// Replaces each {name} with values.at(name) in a single left-to-right pass;
// substituted text is never rescanned. Unknown placeholders throw.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values);

// Context, question, and the three choices lettered A-C in stored order.
std::string render_question_block(const Question& q);

// One user message: preamble, instruction, optional confidence request,
// then the question block.
std::vector<ChatMessage> render_baseline_prompt(const Question& q, bool weighted);

// One user message embedding every peer's raw text, labelled LLM1..LLMn in
// the given order. The alternative variant takes exactly one peer. Throws
// ConfigError for an empty peer list or a baseline variant.
std::vector<ChatMessage> render_followup_prompt(const Question& q,
                                                std::span<const ModelTurn> peer_turns,
                                                PromptVariant variant);

}  // namespace mldebias
