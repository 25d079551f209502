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

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mldebias/backend.hpp"
#include "mldebias/error.hpp"
#include "mldebias/log.hpp"

namespace mldebias {

using json = nlohmann::json;

namespace {

bool is_retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

// Caps concurrent requests against one endpoint.
class HttpChatBackend::Limiter {
 public:
  explicit Limiter(int limit) : limit_(limit) {}

  void acquire() {
    if (limit_ <= 0) return;
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
  }

  void release() {
    if (limit_ <= 0) return;
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }

 private:
  int limit_;
  int in_flight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

HttpChatBackend::HttpChatBackend(ModelSpec spec, Sleeper sleeper)
    : spec_(std::move(spec)),
      sleeper_(std::move(sleeper)),
      limiter_(std::make_unique<Limiter>(spec_.max_in_flight)) {
  spec_.kind = BackendKind::kHttpChat;
  if (spec_.endpoint.empty()) {
    throw ConfigError("http_chat model '" + spec_.name + "' has no endpoint");
  }
  if (spec_.model_id.empty()) {
    throw ConfigError("http_chat model '" + spec_.name + "' has no model_id");
  }
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

HttpChatBackend::~HttpChatBackend() = default;

std::string HttpChatBackend::request_body(std::span<const ChatMessage> messages) const {
  json body;
  body["model"] = spec_.model_id;
  body["temperature"] = spec_.temperature;
  if (spec_.max_tokens) body["max_tokens"] = *spec_.max_tokens;
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["messages"] = std::move(msgs);
  return body.dump();
}

std::string HttpChatBackend::parse_response_body(std::string_view body) {
  try {
    json doc = json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_null()) throw BackendError("response has null message content");
    return content.get<std::string>();
  } catch (const json::exception& ex) {
    throw BackendError(std::string("unparseable chat completion response: ") + ex.what());
  }
}

CompletionRecord HttpChatBackend::complete(std::span<const ChatMessage> messages,
                                           const RequestTag& /*tag*/) const {
  CompletionRecord rec;
  rec.request_digest = request_digest(spec_, messages);
  const std::string body = request_body(messages);

  httplib::Headers headers;
  if (!spec_.api_key_env.empty()) {
    const char* key = std::getenv(spec_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + spec_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto started = std::chrono::steady_clock::now();
  std::string last_error;
  const int attempts = 1 + std::max(0, spec_.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      sleeper_(spec_.initial_backoff * (1LL << (attempt - 1)));
    }
    httplib::Client client(spec_.endpoint);
    client.set_connection_timeout(spec_.request_timeout);
    client.set_read_timeout(spec_.request_timeout);
    client.set_write_timeout(spec_.request_timeout);

    limiter_->acquire();
    auto res = client.Post(spec_.endpoint_path, headers, body, "application/json");
    limiter_->release();

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      rec.response_text = parse_response_body(res->body);
      rec.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      return rec;
    } else if (is_retryable_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw BackendError("model '" + spec_.name + "': terminal HTTP " +
                         std::to_string(res->status) + ": " + res->body);
    }
    if (attempt + 1 < attempts) {
      log_warning("model '" + spec_.name + "': " + last_error + ", retrying");
    }
  }
  throw BackendError("model '" + spec_.name + "': retries exhausted (" + last_error + ")");
}

}  // namespace mldebias
