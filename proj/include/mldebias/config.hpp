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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mldebias/backend.hpp"
#include "mldebias/prompts.hpp"
#include "mldebias/protocol.hpp"
#include "mldebias/question.hpp"
#include "mldebias/transcript.hpp"

namespace mldebias {

struct ModelEntry {
  ModelSpec spec;
  std::filesystem::path script;  // scripted models only
};

// Everything needed to reproduce one experiment. Stored as JSON; see
// docs/config.md. Secrets are never stored, only env var names.
struct RunConfig {
  std::filesystem::path dataset;
  std::vector<SocialGroup> groups;  // empty = all nine
  Topology topology = Topology::kDecentralized;
  std::vector<ModelEntry> models;
  int rounds = 3;
  PromptVariant variant = PromptVariant::kFollowup;
  std::uint64_t seed = 0;
  std::optional<std::size_t> subset_size;
  bool chain_leaves = false;
  bool parallel_calls = false;
  std::filesystem::path cache_dir;  // empty = no cache
  std::filesystem::path output_dir = "runs";
  std::string run_name;
  int parallelism = 4;
};

// Fields absent from `json_text` keep their defaults. Relative paths are
// resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical JSON (sorted keys, 2-space indent) of the effective config.
std::string dump_run_config(const RunConfig& cfg);

ModelEntry parse_model_entry(std::string_view json_text,
                             const std::filesystem::path& base_dir = {});

// Checks the topology/model-count/rounds invariants; throws ConfigError.
void validate(const RunConfig& cfg);

// Instantiates backends (wrapped with the cache when cache_dir is set) and
// returns the protocol configuration.
ProtocolConfig make_protocol_config(const RunConfig& cfg);
BackendPtr make_model_backend(const ModelEntry& entry, const std::filesystem::path& cache_dir);

}  // namespace mldebias
