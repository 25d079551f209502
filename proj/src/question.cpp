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

#include "mldebias/question.hpp"

#include <algorithm>
#include <stdexcept>

#include "mldebias/digest.hpp"
#include "mldebias/error.hpp"

namespace mldebias {

namespace {

struct GroupNames {
  SocialGroup group;
  std::string_view upstream;
  std::string_view display;
};

constexpr std::array<GroupNames, 9> kGroupNames = {{
    {SocialGroup::kAge, "Age", "Age"},
    {SocialGroup::kDisability, "Disability_status", "Disability"},
    {SocialGroup::kGenderIdentity, "Gender_identity", "Gender Identity"},
    {SocialGroup::kNationality, "Nationality", "Nationality"},
    {SocialGroup::kPhysicalAppearance, "Physical_appearance", "Physical Appearance"},
    {SocialGroup::kRaceEthnicity, "Race_ethnicity", "Race/Ethnicity"},
    {SocialGroup::kReligion, "Religion", "Religion"},
    {SocialGroup::kSexualOrientation, "Sexual_orientation", "Sexual Orientation"},
    {SocialGroup::kSocioeconomicStatus, "SES", "Socioeconomic Status"},
}};

const GroupNames& names_of(SocialGroup g) {
  return kGroupNames[static_cast<std::size_t>(g)];
}

}  // namespace

std::string_view upstream_category(SocialGroup g) { return names_of(g).upstream; }
std::string_view display_name(SocialGroup g) { return names_of(g).display; }

SocialGroup parse_social_group(std::string_view s) {
  for (const auto& n : kGroupNames) {
    if (s == n.upstream || s == n.display) return n.group;
  }
  throw ParseError("unknown social group category: '" + std::string(s) + "'");
}

Letter letter_at(std::size_t index) {
  if (index > 2) throw std::out_of_range("choice index out of range");
  return static_cast<Letter>(index);
}

std::optional<Letter> parse_letter(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  char c = s[0];
  if (c >= 'a' && c <= 'c') c = static_cast<char>(c - 'a' + 'A');
  if (c < 'A' || c > 'C') return std::nullopt;
  return static_cast<Letter>(c - 'A');
}

std::string_view to_string(Polarity p) {
  return p == Polarity::kNegative ? "neg" : "nonneg";
}

std::string_view to_string(ContextCondition c) {
  return c == ContextCondition::kAmbiguous ? "ambig" : "disambig";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kBbqFull: return "bbq_full";
    case Provenance::kBbqAmbiguous: return "bbq_ambiguous";
    case Provenance::kBbqHard: return "bbq_hard";
  }
  return "bbq_full";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "bbq_full") return Provenance::kBbqFull;
  if (s == "bbq_ambiguous") return Provenance::kBbqAmbiguous;
  if (s == "bbq_hard") return Provenance::kBbqHard;
  throw ParseError("unknown provenance: '" + std::string(s) + "'");
}

void validate(const Question& q) {
  auto fail = [&](const std::string& what) {
    throw ParseError("question '" + q.id + "': " + what);
  };
  if (q.id.empty()) throw ParseError("question with empty id");
  if (q.correct_index > 2 || q.unknown_index > 2) fail("choice index out of range");
  if (q.context_condition == ContextCondition::kAmbiguous &&
      q.correct_index != q.unknown_index) {
    fail("ambiguous item whose correct answer is not the unknown choice");
  }
  if (q.target_index) {
    if (*q.target_index > 2) fail("target index out of range");
    if (*q.target_index == q.unknown_index) fail("target choice equals unknown choice");
  }
}

std::map<SocialGroup, std::size_t> QuestionSet::group_counts() const {
  std::map<SocialGroup, std::size_t> counts;
  for (const auto& q : questions) ++counts[q.category];
  return counts;
}

const Question* QuestionSet::find(std::string_view id) const {
  auto it = std::find_if(questions.begin(), questions.end(),
                         [&](const Question& q) { return q.id == id; });
  return it == questions.end() ? nullptr : &*it;
}

std::string content_digest(const std::vector<Question>& questions, Provenance p) {
  Sha256 h;
  h.update_field(to_string(p));
  for (const auto& q : questions) {
    h.update_field(q.id);
    h.update_field(upstream_category(q.category));
    h.update_field(q.context);
    h.update_field(q.question);
    for (const auto& c : q.choices) h.update_field(c);
    h.update_field(std::to_string(q.correct_index));
    h.update_field(q.target_index ? std::to_string(*q.target_index) : "-");
    h.update_field(std::to_string(q.unknown_index));
    h.update_field(to_string(q.polarity));
    h.update_field(to_string(q.context_condition));
  }
  return h.hex_digest();
}

}  // namespace mldebias
