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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mldebias {

// The nine BBQ social groups, in the order every report uses.
enum class SocialGroup {
  kAge,
  kDisability,
  kGenderIdentity,
  kNationality,
  kPhysicalAppearance,
  kRaceEthnicity,
  kReligion,
  kSexualOrientation,
  kSocioeconomicStatus,
};

inline constexpr std::array<SocialGroup, 9> kAllGroups = {
    SocialGroup::kAge,
    SocialGroup::kDisability,
    SocialGroup::kGenderIdentity,
    SocialGroup::kNationality,
    SocialGroup::kPhysicalAppearance,
    SocialGroup::kRaceEthnicity,
    SocialGroup::kReligion,
    SocialGroup::kSexualOrientation,
    SocialGroup::kSocioeconomicStatus,
};

// Category string used by the upstream BBQ files ("Disability_status", "SES").
std::string_view upstream_category(SocialGroup g);
// Human-readable label used in reports ("Disability", "Socioeconomic Status").
std::string_view display_name(SocialGroup g);
// Accepts the upstream category string or the display label. Throws
// ParseError for anything else.
SocialGroup parse_social_group(std::string_view s);

// One of the three answer options.
enum class Letter { A = 0, B = 1, C = 2 };

inline constexpr std::size_t index_of(Letter l) { return static_cast<std::size_t>(l); }
inline constexpr char to_char(Letter l) { return static_cast<char>('A' + index_of(l)); }
Letter letter_at(std::size_t index);
std::optional<Letter> parse_letter(std::string_view s);

enum class Polarity { kNegative, kNonNegative };
enum class ContextCondition { kAmbiguous, kDisambiguated };

std::string_view to_string(Polarity p);
std::string_view to_string(ContextCondition c);

struct Question {
  std::string id;
  SocialGroup category = SocialGroup::kAge;
  std::string context;
  std::string question;
  std::array<std::string, 3> choices;
  std::size_t correct_index = 0;
  std::optional<std::size_t> target_index;
  std::size_t unknown_index = 0;
  Polarity polarity = Polarity::kNegative;
  ContextCondition context_condition = ContextCondition::kAmbiguous;

  bool operator==(const Question&) const = default;
};

// Throws ParseError when a Question breaks its invariants.
void validate(const Question& q);

enum class Provenance { kBbqFull, kBbqAmbiguous, kBbqHard };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct QuestionSet {
  std::vector<Question> questions;
  Provenance provenance = Provenance::kBbqFull;
  std::string source_digest;

  bool operator==(const QuestionSet&) const = default;

  std::map<SocialGroup, std::size_t> group_counts() const;
  const Question* find(std::string_view id) const;
};

// Content digest over provenance and the canonical form of every question.
// Any change to any field of any question changes the digest.
std::string content_digest(const std::vector<Question>& questions, Provenance p);

}  // namespace mldebias
