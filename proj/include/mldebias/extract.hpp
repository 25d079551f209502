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
#include <string_view>

#include "mldebias/question.hpp"

namespace mldebias {

// Pulls the chosen letter out of a free-text model reply. Rules, first hit
// wins (cue words match case-insensitively; a bare letter must be upper case
// unless it is parenthesised):
//   1. a letter opening the reply: "B", "(b)", "B.", "B:", "B)", "C (unknown)";
//   2. a cue phrase: "answer is C", "Answer: (B)", "option A";
//   3. the first parenthesised letter anywhere: "I choose (B) because";
//   4. exactly one choice's text appears in the reply.
// Returns nullopt otherwise.
std::optional<Letter> extract_answer(std::string_view raw_text, const Question& q);

// First integer 1-7 next to a confidence cue ("confidence", "confident",
// "score"). Numbers after a cue are preferred over numbers before it; the
// "1 to 7" scale description and "/7" denominators are ignored.
std::optional<int> extract_confidence(std::string_view raw_text);

}  // namespace mldebias
