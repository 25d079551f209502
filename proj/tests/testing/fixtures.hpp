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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mldebias/question.hpp"

namespace mldebias::testing {

// Removes the directory tree on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Age question: A = "The grandfather" (stereotype target), B = "The
// grandson", C = "Can't be determined" (unknown, correct).
Question age_question(const std::string& id);

// A question from `group` with the unknown choice at `unknown_index` and the
// target at `target_index`.
Question make_question(const std::string& id, SocialGroup group, std::size_t unknown_index,
                       std::optional<std::size_t> target_index);

struct RecordSpec {
  int example_id = 0;
  std::string category = "Age";
  std::string context_condition = "ambig";
  std::string polarity = "neg";
  std::size_t unknown_index = 2;
  std::size_t label = 2;
};

// One upstream-schema BBQ line. Choice group labels and stereotyped groups
// follow the category's conventions in the public BBQ release.
std::string bbq_record(const RecordSpec& spec);

// Ambiguous-item counts per category in the public BBQ release.
const std::map<SocialGroup, std::size_t>& published_ambiguous_counts();

// Writes the nine per-category files under `dir`, each with the given number
// of ambiguous items and the same number of disambiguated ones, unknown
// position and polarity rotating across items.
void write_bbq_fixture(const std::filesystem::path& dir,
                       const std::map<SocialGroup, std::size_t>& ambiguous_counts);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Golden files live in tests/golden. Set MLDEBIAS_UPDATE_GOLDEN=1 to
// (re)write them instead of comparing.
std::string golden_path(const std::string& name);
std::string read_golden(const std::string& name);
bool update_golden_requested();

}  // namespace mldebias::testing
