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
#include <vector>

#include "mldebias/metrics.hpp"
#include "mldebias/transcript.hpp"

namespace mldebias {

// One "turn" line per model reply followed by one "summary" line. Field
// names are fixed; see docs/transcript_format.md.
std::string transcript_to_jsonl(const Transcript& t);

void write_transcripts(std::span<const Transcript> transcripts, const std::filesystem::path& path);
std::vector<Transcript> read_transcripts(const std::filesystem::path& path);

std::string outcome_to_json(const Outcome& o);
Outcome outcome_from_json(std::string_view line);

void write_outcomes(std::span<const Outcome> outcomes, const std::filesystem::path& path);
std::vector<Outcome> read_outcomes(const std::filesystem::path& path);

// Writes `content` to `path` atomically (temp file + rename).
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace mldebias
