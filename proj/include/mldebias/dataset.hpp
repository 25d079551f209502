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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mldebias/backend.hpp"
#include "mldebias/question.hpp"

namespace mldebias {

enum class ContextFilter { kAll, kAmbiguous, kDisambiguated };

// Parses one upstream BBQ record (see docs/bbq_schema.md). Records written by
// write_question_set carry explicit index fields that take precedence over
// the answer metadata.
Question parse_bbq_record(std::string_view line);

// Serializes a question in the upstream schema plus explicit index fields.
std::string to_bbq_record(const Question& q);

// The nine per-category files ("Age.jsonl", ..., "SES.jsonl") under `dir`.
// Intersectional files such as Race_x_SES.jsonl are not part of the set.
// Throws IoError if any is missing.
std::vector<std::filesystem::path> bbq_files_in(const std::filesystem::path& dir);

// Loads line-delimited BBQ records and keeps those matching `keep`. Any
// malformed record aborts the load with ParseError; unreadable files throw
// IoError. Deterministic: same files, same set and digest.
QuestionSet load_bbq(std::span<const std::filesystem::path> paths,
                     ContextFilter keep = ContextFilter::kAmbiguous);

struct HardFilterOptions {
  std::string base_instruction;  // empty = default_base_instruction()
  int queries_per_question = 1;
  int parallelism = 1;
};

struct HardFilterResult {
  QuestionSet hard;
  // Ids kept because no letter could be extracted from the reply.
  std::vector<std::string> extraction_failures;
};

// Keeps the questions the filter model fails on: a question survives if
// any query's extracted answer differs from the correct choice or cannot be
// extracted. Output preserves input order. A terminal backend failure
// propagates as BackendError; wrap the backend with a cache to resume.
HardFilterResult extract_hard(const QuestionSet& qs, const Backend& filter_backend,
                              const HardFilterOptions& options = {});

// Header record followed by one record per question; see
// docs/bbq_schema.md. read_question_set verifies the stored digest and
// throws IoError on mismatch.
void write_question_set(const QuestionSet& qs, const std::filesystem::path& path);
QuestionSet read_question_set(const std::filesystem::path& path);

// True when the first line of `path` is a question-set header.
bool is_question_set_file(const std::filesystem::path& path);

}  // namespace mldebias
