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

#include "mldebias/prompts.hpp"

#include "mldebias/error.hpp"
#include "mldebias/prompt_templates.hpp"

namespace mldebias {

std::string_view to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::kBaseline: return "baseline";
    case PromptVariant::kFollowup: return "followup";
    case PromptVariant::kFollowupWeighted: return "followup_weighted";
    case PromptVariant::kFollowupAlternative: return "followup_alternative";
    case PromptVariant::kBaselineWeighted: return "baseline_weighted";
  }
  return "baseline";
}

PromptVariant parse_prompt_variant(std::string_view s) {
  for (auto v : {PromptVariant::kBaseline, PromptVariant::kFollowup,
                 PromptVariant::kFollowupWeighted, PromptVariant::kFollowupAlternative,
                 PromptVariant::kBaselineWeighted}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown prompt variant: '" + std::string(s) + "'");
}

bool is_weighted(PromptVariant v) {
  return v == PromptVariant::kFollowupWeighted || v == PromptVariant::kBaselineWeighted;
}

std::string_view default_base_instruction() { return templates::k_preamble; }

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const std::size_t close = tmpl.find('}', open);
    if (close == std::string_view::npos) {
      throw ConfigError("unterminated placeholder in template");
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::string_view name = tmpl.substr(open + 1, close - open - 1);
    auto it = values.find(name);
    if (it == values.end()) {
      throw ConfigError("template placeholder without value: {" + std::string(name) + "}");
    }
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

std::string render_question_block(const Question& q) {
  return render_template(templates::k_question, {{"context", q.context},
                                                  {"question", q.question},
                                                  {"choice_a", q.choices[0]},
                                                  {"choice_b", q.choices[1]},
                                                  {"choice_c", q.choices[2]}});
}

std::vector<ChatMessage> render_baseline_prompt(const Question& q, bool weighted) {
  std::string text = render_template(
      templates::k_baseline,
      {{"preamble", std::string(templates::k_preamble)},
       {"instruction", std::string(templates::k_instruction)},
       {"confidence_inline", weighted ? " " + std::string(templates::k_confidence) : ""},
       {"question", render_question_block(q)}});
  return {ChatMessage{Role::kUser, std::move(text)}};
}

std::vector<ChatMessage> render_followup_prompt(const Question& q,
                                                std::span<const ModelTurn> peer_turns,
                                                PromptVariant variant) {
  if (variant == PromptVariant::kBaseline || variant == PromptVariant::kBaselineWeighted) {
    throw ConfigError("follow-up prompt requested with a baseline variant");
  }
  if (peer_turns.empty()) throw ConfigError("follow-up prompt needs at least one peer response");

  const std::string question = render_question_block(q);
  const std::string prompt(templates::k_preamble);

  if (variant == PromptVariant::kFollowupAlternative) {
    if (peer_turns.size() != 1) {
      throw ConfigError("the alternative follow-up prompt embeds exactly one response");
    }
    return {ChatMessage{Role::kUser,
                        render_template(templates::k_alternative,
                                        {{"question", question},
                                         {"response", peer_turns.front().raw_text},
                                         {"prompt", prompt}})}};
  }

  std::string responses;
  for (std::size_t i = 0; i < peer_turns.size(); ++i) {
    responses += render_template(templates::k_followup_block,
                                 {{"index", std::to_string(i + 1)},
                                  {"response", peer_turns[i].raw_text}});
  }
  const bool weighted = is_weighted(variant);
  std::string text = render_template(
      templates::k_followup,
      {{"question", question},
       {"responses", responses},
       {"prompt", prompt},
       {"confidence_block", weighted ? "\n\n" + std::string(templates::k_confidence) : ""}});
  return {ChatMessage{Role::kUser, std::move(text)}};
}

}  // namespace mldebias
