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

#include <gtest/gtest.h>

#include "mldebias/error.hpp"
#include "testing/fixtures.hpp"

namespace mldebias {
namespace {

TEST(SocialGroupTest, UpstreamNamesRoundTrip) {
  for (SocialGroup g : kAllGroups) {
    EXPECT_EQ(parse_social_group(upstream_category(g)), g);
    EXPECT_EQ(parse_social_group(display_name(g)), g);
  }
}

TEST(SocialGroupTest, UnknownNameIsRejected) {
  EXPECT_THROW(parse_social_group("Astrology"), ParseError);
  EXPECT_THROW(parse_social_group(""), ParseError);
}

TEST(SocialGroupTest, NineDistinctGroups) {
  std::set<std::string_view> names;
  for (SocialGroup g : kAllGroups) names.insert(upstream_category(g));
  EXPECT_EQ(names.size(), 9u);
  EXPECT_EQ(upstream_category(SocialGroup::kSocioeconomicStatus), "SES");
  EXPECT_EQ(upstream_category(SocialGroup::kDisability), "Disability_status");
}

TEST(LetterTest, IndexRoundTrip) {
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(index_of(letter_at(i)), i);
  EXPECT_EQ(to_char(Letter::B), 'B');
  EXPECT_THROW(letter_at(3), std::out_of_range);
}

TEST(LetterTest, ParseIsCaseInsensitiveSingleChar) {
  EXPECT_EQ(parse_letter("a"), Letter::A);
  EXPECT_EQ(parse_letter("C"), Letter::C);
  EXPECT_EQ(parse_letter("D"), std::nullopt);
  EXPECT_EQ(parse_letter("AB"), std::nullopt);
  EXPECT_EQ(parse_letter(""), std::nullopt);
}

TEST(QuestionTest, ValidFixturePasses) {
  EXPECT_NO_THROW(validate(testing::age_question("q1")));
}

TEST(QuestionTest, TargetEqualToUnknownIsRejected) {
  Question q = testing::age_question("q1");
  q.target_index = q.unknown_index;
  EXPECT_THROW(validate(q), ParseError);
}

TEST(QuestionTest, EmptyIdIsRejected) {
  Question q = testing::age_question("");
  EXPECT_THROW(validate(q), ParseError);
}

TEST(QuestionTest, IndexOutOfRangeIsRejected) {
  Question q = testing::age_question("q1");
  q.correct_index = 3;
  EXPECT_THROW(validate(q), ParseError);
}

TEST(QuestionSetTest, GroupCountsAndFind) {
  QuestionSet qs;
  qs.questions = {testing::age_question("a1"), testing::age_question("a2"),
                  testing::make_question("r1", SocialGroup::kReligion, 0, 1)};
  const auto counts = qs.group_counts();
  EXPECT_EQ(counts.at(SocialGroup::kAge), 2u);
  EXPECT_EQ(counts.at(SocialGroup::kReligion), 1u);
  ASSERT_NE(qs.find("r1"), nullptr);
  EXPECT_EQ(qs.find("r1")->category, SocialGroup::kReligion);
  EXPECT_EQ(qs.find("zz"), nullptr);
}

TEST(ContentDigestTest, SensitiveToOrderContentAndProvenance) {
  std::vector<Question> a = {testing::age_question("a1"), testing::age_question("a2")};
  std::vector<Question> b = {a[1], a[0]};
  const std::string d = content_digest(a, Provenance::kBbqAmbiguous);
  EXPECT_EQ(d.size(), 64u);
  EXPECT_EQ(d, content_digest(a, Provenance::kBbqAmbiguous));
  EXPECT_NE(d, content_digest(b, Provenance::kBbqAmbiguous));
  EXPECT_NE(d, content_digest(a, Provenance::kBbqHard));
  a[0].context += " ";
  EXPECT_NE(d, content_digest(a, Provenance::kBbqAmbiguous));
}

TEST(ProvenanceTest, RoundTrip) {
  for (Provenance p : {Provenance::kBbqFull, Provenance::kBbqAmbiguous, Provenance::kBbqHard}) {
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  }
  EXPECT_THROW(parse_provenance("bbq_soft"), ParseError);
}

}  // namespace
}  // namespace mldebias
