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

#include "mldebias/protocol.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <set>

#include "mldebias/error.hpp"
#include "mldebias/extract.hpp"
#include "mldebias/parallel.hpp"
#include "mldebias/random.hpp"

namespace mldebias {

namespace {

constexpr int kImputedConfidence = 4;

struct Call {
  const Backend* backend;
  std::vector<ChatMessage> messages;
};

ModelTurn ask(const Call& call, const Question& q, int round, bool weighted) {
  const std::string& name = call.backend->spec().name;
  CompletionRecord rec = complete(*call.backend, call.messages, RequestTag{q.id, round, name});
  ModelTurn turn;
  turn.model = name;
  turn.round = round;
  turn.raw_text = std::move(rec.response_text);
  turn.extracted_answer = extract_answer(turn.raw_text, q);
  if (weighted) turn.confidence = extract_confidence(turn.raw_text);
  return turn;
}

// Calls within one phase are independent; results come back in call order
// regardless of scheduling.
std::vector<ModelTurn> run_phase(const std::vector<Call>& calls, const Question& q, int round,
                                 bool weighted, bool parallel) {
  std::vector<ModelTurn> turns(calls.size());
  parallel_for(calls.size(), parallel ? static_cast<int>(calls.size()) : 1,
               [&](std::size_t i) { turns[i] = ask(calls[i], q, round, weighted); });
  return turns;
}

std::vector<std::optional<Letter>> answers_of(std::span<const ModelTurn> turns) {
  std::vector<std::optional<Letter>> out;
  out.reserve(turns.size());
  for (const auto& t : turns) out.push_back(t.extracted_answer);
  return out;
}

std::size_t model_rank(const ProtocolConfig& cfg, const std::string& name) {
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    if (cfg.models[i]->spec().name == name) return i;
  }
  return cfg.models.size();
}

// Picks the letter with the highest score; ties go to the letter whose first
// supporter ranks earliest in cfg order.
std::optional<Letter> vote(const ProtocolConfig& cfg, std::span<const ModelTurn> turns,
                           bool weighted) {
  std::array<long, 3> score{};
  std::array<std::size_t, 3> first_rank;
  first_rank.fill(SIZE_MAX);
  bool any = false;
  for (const auto& t : turns) {
    if (!t.extracted_answer) continue;
    any = true;
    const std::size_t l = index_of(*t.extracted_answer);
    score[l] += weighted ? t.confidence.value_or(kImputedConfidence) : 1;
    first_rank[l] = std::min(first_rank[l], model_rank(cfg, t.model));
  }
  if (!any) return std::nullopt;
  std::size_t best = 3;
  for (std::size_t l = 0; l < 3; ++l) {
    if (first_rank[l] == SIZE_MAX) continue;
    if (best == 3 || score[l] > score[best] ||
        (score[l] == score[best] && first_rank[l] < first_rank[best])) {
      best = l;
    }
  }
  return letter_at(best);
}

void finish(Transcript& t, const ProtocolConfig& cfg) {
  const Resolution r = resolve_final_answer(t, cfg);
  t.final_answer = r.answer;
  t.final_source = r.source;
}

void mark_converged(Transcript& t, int round) {
  t.rounds_used = round;
  t.converged = true;
}

}  // namespace

void validate(const ProtocolConfig& cfg, Topology topology) {
  const std::size_t k = cfg.models.size();
  if (k == 0) throw ConfigError("protocol needs at least one model");
  std::set<std::string> names;
  for (const auto& m : cfg.models) {
    if (!m) throw ConfigError("null model backend");
    if (!names.insert(m->spec().name).second) {
      throw ConfigError("duplicate model name '" + m->spec().name + "'");
    }
  }
  if (cfg.max_rounds < 1) throw ConfigError("max rounds must be at least 1");

  if (topology == Topology::kBaseline) {
    if (k != 1) throw ConfigError("baseline topology takes exactly one model");
    if (cfg.max_rounds != 1) throw ConfigError("baseline topology runs exactly one round");
    return;
  }
  if (k < 2) throw ConfigError("multi-model topologies need at least two models");
  if (cfg.variant == PromptVariant::kBaseline || cfg.variant == PromptVariant::kBaselineWeighted) {
    throw ConfigError("multi-model topologies need a follow-up prompt variant");
  }
  if (cfg.variant == PromptVariant::kFollowupAlternative && k != 2) {
    throw ConfigError("the alternative follow-up prompt is defined for two models only");
  }
  if (topology == Topology::kCentralized && cfg.centralized_subset_size) {
    const std::size_t s = *cfg.centralized_subset_size;
    if (s < 1 || s > k - 1) {
      throw ConfigError("centralized subset size must be in [1, k-1]");
    }
  }
}

bool check_convergence(std::span<const std::optional<Letter>> latest_answers) {
  if (latest_answers.empty()) return false;
  const auto& first = latest_answers.front();
  if (!first) return false;
  return std::all_of(latest_answers.begin(), latest_answers.end(),
                     [&](const std::optional<Letter>& a) { return a == first; });
}

std::vector<std::size_t> select_centralized_subset(const ProtocolConfig& cfg,
                                                   std::string_view question_id) {
  const std::size_t leaves = cfg.models.size() > 0 ? cfg.models.size() - 1 : 0;
  std::vector<std::size_t> pool(leaves);
  std::iota(pool.begin(), pool.end(), std::size_t{1});
  const std::size_t want = cfg.centralized_subset_size.value_or(leaves);
  if (want >= leaves) return pool;

  std::mt19937_64 rng(mix_seed(cfg.seed, question_id));
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + uniform_below(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(want);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Resolution resolve_final_answer(const Transcript& transcript, const ProtocolConfig& cfg) {
  if (transcript.aborted() || transcript.rounds_used < 1) return {};
  const std::vector<ModelTurn> last = transcript.turns_in_round(transcript.rounds_used);
  if (last.empty()) return {};

  if (transcript.converged) {
    return {last.back().extracted_answer, FinalSource::kConvergence};
  }
  if (is_weighted(cfg.variant)) {
    auto answer = vote(cfg, last, /*weighted=*/true);
    return {answer, answer ? FinalSource::kWeightedVote : FinalSource::kUnresolved};
  }
  if (transcript.topology == Topology::kCentralized) {
    const std::string& central = cfg.models.front()->spec().name;
    for (auto it = transcript.turns.rbegin(); it != transcript.turns.rend(); ++it) {
      if (it->model != central) continue;
      if (!it->extracted_answer) return {};
      return {it->extracted_answer, FinalSource::kCentralLatest};
    }
    return {};
  }
  auto answer = vote(cfg, last, /*weighted=*/false);
  return {answer, answer ? FinalSource::kMajorityVote : FinalSource::kUnresolved};
}

Transcript run_baseline(const Question& q, const ProtocolConfig& cfg) {
  validate(cfg, Topology::kBaseline);
  const bool weighted = is_weighted(cfg.variant);
  Transcript t;
  t.question_id = q.id;
  t.topology = Topology::kBaseline;
  try {
    t.rounds_used = 1;
    auto turns = run_phase({Call{cfg.models.front().get(), render_baseline_prompt(q, weighted)}},
                           q, 1, weighted, false);
    t.turns.push_back(turns.front());
    if (check_convergence(answers_of(t.turns))) mark_converged(t, 1);
  } catch (const BackendError& e) {
    t.error = e.what();
    return t;
  }
  finish(t, cfg);
  return t;
}

Transcript run_centralized(const Question& q, const ProtocolConfig& cfg) {
  validate(cfg, Topology::kCentralized);
  const bool weighted = is_weighted(cfg.variant);
  const Backend* central = cfg.models.front().get();
  const std::vector<std::size_t> subset = select_centralized_subset(cfg, q.id);

  Transcript t;
  t.question_id = q.id;
  t.topology = Topology::kCentralized;
  std::vector<ModelTurn> leaf_latest;

  try {
    for (int round = 1; round <= cfg.max_rounds; ++round) {
      t.rounds_used = round;

      // M1 answers the question (round 1) or synthesises the leaves' replies.
      std::vector<ChatMessage> central_prompt =
          round == 1 ? render_baseline_prompt(q, weighted)
                     : render_followup_prompt(q, leaf_latest, cfg.variant);
      const ModelTurn m1 =
          run_phase({Call{central, std::move(central_prompt)}}, q, round, weighted, false)
              .front();
      t.turns.push_back(m1);

      if (round > 1) {
        std::vector<std::optional<Letter>> answers{m1.extracted_answer};
        for (const auto& l : leaf_latest) answers.push_back(l.extracted_answer);
        if (check_convergence(answers)) {
          mark_converged(t, round);
          break;
        }
      }

      std::vector<ModelTurn> leaves;
      if (cfg.chain_leaves) {
        ModelTurn previous = m1;
        for (std::size_t idx : subset) {
          std::vector<Call> call{Call{cfg.models[idx].get(),
                                      render_followup_prompt(q, std::span(&previous, 1),
                                                             cfg.variant)}};
          previous = run_phase(call, q, round, weighted, false).front();
          leaves.push_back(previous);
        }
      } else {
        std::vector<Call> calls;
        for (std::size_t idx : subset) {
          calls.push_back(Call{cfg.models[idx].get(),
                               render_followup_prompt(q, std::span(&m1, 1), cfg.variant)});
        }
        leaves = run_phase(calls, q, round, weighted, cfg.parallel_calls);
      }
      t.turns.insert(t.turns.end(), leaves.begin(), leaves.end());
      leaf_latest = std::move(leaves);

      std::vector<std::optional<Letter>> answers{m1.extracted_answer};
      for (const auto& l : leaf_latest) answers.push_back(l.extracted_answer);
      if (check_convergence(answers)) {
        mark_converged(t, round);
        break;
      }
    }
  } catch (const BackendError& e) {
    t.error = e.what();
    return t;
  }
  finish(t, cfg);
  return t;
}

Transcript run_decentralized(const Question& q, const ProtocolConfig& cfg) {
  validate(cfg, Topology::kDecentralized);
  const bool weighted = is_weighted(cfg.variant);
  const std::size_t k = cfg.models.size();

  Transcript t;
  t.question_id = q.id;
  t.topology = Topology::kDecentralized;
  std::vector<ModelTurn> latest;

  try {
    for (int round = 1; round <= cfg.max_rounds; ++round) {
      t.rounds_used = round;
      std::vector<Call> calls;
      calls.reserve(k);
      for (std::size_t i = 0; i < k; ++i) {
        if (round == 1) {
          calls.push_back(Call{cfg.models[i].get(), render_baseline_prompt(q, weighted)});
          continue;
        }
        // Every update reads the previous round's replies only.
        std::vector<ModelTurn> peers;
        for (std::size_t j = 0; j < k; ++j) {
          if (j != i) peers.push_back(latest[j]);
        }
        calls.push_back(
            Call{cfg.models[i].get(), render_followup_prompt(q, peers, cfg.variant)});
      }
      latest = run_phase(calls, q, round, weighted, cfg.parallel_calls);
      t.turns.insert(t.turns.end(), latest.begin(), latest.end());
      if (check_convergence(answers_of(latest))) {
        mark_converged(t, round);
        break;
      }
    }
  } catch (const BackendError& e) {
    t.error = e.what();
    return t;
  }
  finish(t, cfg);
  return t;
}

Transcript run_protocol(const Question& q, const ProtocolConfig& cfg, Topology topology) {
  switch (topology) {
    case Topology::kBaseline: return run_baseline(q, cfg);
    case Topology::kCentralized: return run_centralized(q, cfg);
    case Topology::kDecentralized: return run_decentralized(q, cfg);
  }
  throw ConfigError("unknown topology");
}

}  // namespace mldebias
