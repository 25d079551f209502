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

#include "mldebias/backend.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "mldebias/digest.hpp"
#include "mldebias/error.hpp"
#include "mldebias/log.hpp"

namespace mldebias {

using json = nlohmann::json;

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink_slot() {
  static LogSink sink;
  return sink;
}

}  // namespace

LogSink set_warning_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(sink, sink_slot());
  return sink;
}

void log_warning(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink_slot()) {
    sink_slot()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view s) {
  if (s == "system") return Role::kSystem;
  if (s == "user") return Role::kUser;
  if (s == "assistant") return Role::kAssistant;
  throw ParseError("unknown chat role: '" + std::string(s) + "'");
}

std::string_view to_string(BackendKind k) {
  return k == BackendKind::kHttpChat ? "http_chat" : "scripted";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "http_chat") return BackendKind::kHttpChat;
  if (s == "scripted") return BackendKind::kScripted;
  throw ConfigError("unknown backend kind: '" + std::string(s) + "'");
}

std::string request_digest(const ModelSpec& spec, std::span<const ChatMessage> messages) {
  json key;
  key["model_id"] = spec.model_id;
  key["temperature"] = spec.temperature;
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  key["messages"] = std::move(msgs);
  // json::dump sorts object keys, so the serialization is canonical.
  return sha256_hex(key.dump());
}

CompletionRecord complete(const Backend& backend, std::span<const ChatMessage> messages,
                          const RequestTag& tag) {
  if (messages.empty()) throw ConfigError("complete: empty message list");
  for (const auto& m : messages) {
    if (m.content.empty()) throw ConfigError("complete: message with empty content");
  }
  return backend.complete(messages, tag);
}

// -- Script -----------------------------------------------------------------

Script& Script::set(std::string question_id, int round, std::string role,
                    std::string response) {
  entries_[{std::move(question_id), round, std::move(role)}] = std::move(response);
  return *this;
}

Script& Script::set_all_rounds(std::string question_id, std::string role,
                               std::string response) {
  return set(std::move(question_id), 0, std::move(role), std::move(response));
}

std::optional<std::string> Script::lookup(const RequestTag& tag) const {
  const std::string any(kAny);
  // Most specific first: question id, then round, then role.
  const std::tuple<std::string, int, std::string> candidates[] = {
      {tag.question_id, tag.round, tag.role}, {tag.question_id, 0, tag.role},
      {any, tag.round, tag.role},             {any, 0, tag.role},
      {tag.question_id, tag.round, any},      {tag.question_id, 0, any},
      {any, tag.round, any},                  {any, 0, any},
  };
  for (const auto& key : candidates) {
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  return std::nullopt;
}

Script Script::from_json_text(std::string_view text) {
  Script script;
  try {
    json doc = json::parse(text);
    for (const auto& e : doc.at("entries")) {
      script.set(e.value("question", std::string(kAny)), e.value("round", 0),
                 e.value("role", std::string(kAny)), e.at("response").get<std::string>());
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed script: ") + ex.what());
  }
  return script;
}

Script Script::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read script file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

// -- ScriptedBackend --------------------------------------------------------

ScriptedBackend::ScriptedBackend(ModelSpec spec, Script script)
    : spec_(std::move(spec)), script_(std::move(script)) {
  spec_.kind = BackendKind::kScripted;
  if (spec_.model_id.empty()) spec_.model_id = "scripted:" + spec_.name;
}

CompletionRecord ScriptedBackend::complete(std::span<const ChatMessage> messages,
                                           const RequestTag& tag) const {
  RequestTag keyed = tag;
  keyed.role = spec_.name;
  auto response = script_.lookup(keyed);
  if (!response) {
    throw BackendError("scripted model '" + spec_.name + "' has no entry for question '" +
                       tag.question_id + "' round " + std::to_string(tag.round));
  }
  CompletionRecord rec;
  rec.request_digest = request_digest(spec_, messages);
  rec.response_text = *response;
  return rec;
}

BackendPtr scripted_backend(std::string name, Script script) {
  ModelSpec spec;
  spec.name = std::move(name);
  return std::make_shared<ScriptedBackend>(std::move(spec), std::move(script));
}

BackendPtr make_backend(const ModelSpec& spec, const Script* script) {
  switch (spec.kind) {
    case BackendKind::kHttpChat:
      return std::make_shared<HttpChatBackend>(spec);
    case BackendKind::kScripted:
      if (script == nullptr) {
        throw ConfigError("scripted model '" + spec.name + "' has no script");
      }
      return std::make_shared<ScriptedBackend>(spec, *script);
  }
  throw ConfigError("unsupported backend kind");
}

}  // namespace mldebias
