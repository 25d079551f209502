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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace mldebias {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

enum class BackendKind { kHttpChat, kScripted };

std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct ModelSpec {
  std::string name;  // role label within a run, e.g. "M1"
  BackendKind kind = BackendKind::kScripted;
  // http_chat only.
  std::string endpoint;  // scheme://host[:port]
  std::string endpoint_path = "/v1/chat/completions";
  std::string api_key_env;  // name of the env var holding the bearer token
  std::string model_id;
  double temperature = 1.0;
  std::optional<int> max_tokens = 512;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1'000};
  int max_in_flight = 0;  // 0 = unlimited
};

// Identifies which conversation slot a request belongs to. Scripted
// backends answer by tag; live and cached backends ignore it.
struct RequestTag {
  std::string question_id;
  int round = 0;
  std::string role;
};

struct CompletionRecord {
  std::string request_digest;
  std::string response_text;
  std::chrono::milliseconds latency{0};
  bool retrieved_from_cache = false;
};

// Digest over (model_id, temperature, ordered messages). Any change in any
// of those yields a different key.
std::string request_digest(const ModelSpec& spec, std::span<const ChatMessage> messages);

// An answer-producing endpoint. Implementations must be safe to call from
// several threads at once and must not depend on call history.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const ModelSpec& spec() const = 0;
  virtual CompletionRecord complete(std::span<const ChatMessage> messages,
                                    const RequestTag& tag) const = 0;
};

using BackendPtr = std::shared_ptr<const Backend>;

// Validates the message list, then forwards to the backend.
CompletionRecord complete(const Backend& backend, std::span<const ChatMessage> messages,
                          const RequestTag& tag = {});

// Lookup table for scripted models. Keys are (question id, round, role);
// "*" as question id or role and 0 as round act as wildcards. Exact
// entries win over wildcard ones.
class Script {
 public:
  static constexpr std::string_view kAny = "*";

  Script() = default;

  Script& set(std::string question_id, int round, std::string role, std::string response);
  // Same response for every round of `question_id`.
  Script& set_all_rounds(std::string question_id, std::string role, std::string response);

  std::optional<std::string> lookup(const RequestTag& tag) const;
  std::size_t size() const { return entries_.size(); }

  // {"entries": [{"question": "q1", "round": 1, "role": "M1", "response": "A"}, ...]}
  static Script from_json_text(std::string_view text);
  static Script from_file(const std::filesystem::path& path);

 private:
  std::map<std::tuple<std::string, int, std::string>, std::string> entries_;
};

class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(ModelSpec spec, Script script);

  const ModelSpec& spec() const override { return spec_; }
  CompletionRecord complete(std::span<const ChatMessage> messages,
                            const RequestTag& tag) const override;

 private:
  ModelSpec spec_;
  Script script_;
};

// A scripted model named `name`. The tag's role is always replaced with
// `name` before lookup.
BackendPtr scripted_backend(std::string name, Script script);

// Chat-completions style HTTP+JSON client with exponential backoff on
// timeouts, connection failures, 429 and 5xx.
class HttpChatBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatBackend(ModelSpec spec, Sleeper sleeper = {});
  ~HttpChatBackend() override;

  const ModelSpec& spec() const override { return spec_; }
  CompletionRecord complete(std::span<const ChatMessage> messages,
                            const RequestTag& tag) const override;

  // Request body sent for `messages`. Exposed for wire-format tests.
  std::string request_body(std::span<const ChatMessage> messages) const;
  // Extracts the assistant text from a response body; throws BackendError.
  static std::string parse_response_body(std::string_view body);

 private:
  class Limiter;

  ModelSpec spec_;
  Sleeper sleeper_;
  std::unique_ptr<Limiter> limiter_;
};

// Builds the backend described by `spec`. Scripted specs need a script.
BackendPtr make_backend(const ModelSpec& spec, const Script* script = nullptr);

// Content-addressed persistent cache in front of any backend. One file per
// request digest; see docs/cache_format.md.
class CachedBackend final : public Backend {
 public:
  CachedBackend(BackendPtr inner, std::filesystem::path cache_dir);
  ~CachedBackend() override;

  const ModelSpec& spec() const override { return inner_->spec(); }
  CompletionRecord complete(std::span<const ChatMessage> messages,
                            const RequestTag& tag) const override;

  const std::filesystem::path& cache_dir() const { return cache_dir_; }
  std::filesystem::path entry_path(std::string_view digest) const;

 private:
  class KeyLocks;

  BackendPtr inner_;
  std::filesystem::path cache_dir_;
  std::unique_ptr<KeyLocks> locks_;
};

BackendPtr with_cache(BackendPtr inner, const std::filesystem::path& cache_dir);

}  // namespace mldebias
