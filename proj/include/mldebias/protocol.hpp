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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mldebias/backend.hpp"
#include "mldebias/prompts.hpp"
#include "mldebias/question.hpp"
#include "mldebias/transcript.hpp"

namespace mldebias {

struct ProtocolConfig {
  // M1 first. M1 is the central model in the centralized topology.
  std::vector<BackendPtr> models;
  int max_rounds = 3;
  PromptVariant variant = PromptVariant::kFollowup;
  // Leaves consulted by M1 each round; defaults to all k-1 other models.
  std::optional<std::size_t> centralized_subset_size;
  std::uint64_t seed = 0;
  // Leaves answer one after another, each seeing the previous reply,
  // instead of all answering M1's latest reply.
  bool chain_leaves = false;
  // Issue the independent calls of a round concurrently.
  bool parallel_calls = false;
};

// Throws ConfigError when `cfg` cannot drive `topology`.
void validate(const ProtocolConfig& cfg, Topology topology);

// True iff every answer is present and all are equal.
bool check_convergence(std::span<const std::optional<Letter>> latest_answers);

// Leaf models (indices into cfg.models, ascending) that M1 consults for
// `question_id`. Seeded, so the same question always gets the same subset.
std::vector<std::size_t> select_centralized_subset(const ProtocolConfig& cfg,
                                                   std::string_view question_id);

struct Resolution {
  std::optional<Letter> answer;
  FinalSource source = FinalSource::kUnresolved;

  bool operator==(const Resolution&) const = default;
};

// Final answer for a finished conversation:
//   converged             -> the agreed letter;
//   weighted variants     -> letter with the largest summed confidence over
//                            the last round (missing confidence counts 4);
//   centralized           -> M1's latest answer;
//   decentralized         -> majority over the last round.
// Ties go to the letter given by the earliest model in cfg order. No usable
// answer yields kUnresolved.
Resolution resolve_final_answer(const Transcript& transcript, const ProtocolConfig& cfg);

// Single model, one round, baseline prompt.
Transcript run_baseline(const Question& q, const ProtocolConfig& cfg);
// Star topology around M1.
Transcript run_centralized(const Question& q, const ProtocolConfig& cfg);
// Full mesh with synchronous rounds.
Transcript run_decentralized(const Question& q, const ProtocolConfig& cfg);

Transcript run_protocol(const Question& q, const ProtocolConfig& cfg, Topology topology);

}  // namespace mldebias
