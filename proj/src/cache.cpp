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

#include <array>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "mldebias/backend.hpp"
#include "mldebias/error.hpp"
#include "mldebias/log.hpp"

namespace mldebias {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Striped per-key locks: two requests with the same digest never read or
// write the entry concurrently.
class CachedBackend::KeyLocks {
 public:
  std::mutex& for_key(std::string_view digest) {
    return stripes_[std::hash<std::string_view>{}(digest) % stripes_.size()];
  }

 private:
  std::array<std::mutex, 64> stripes_;
};

namespace {

json request_record(const ModelSpec& spec, std::string_view digest,
                    std::span<const ChatMessage> messages) {
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"type", "request"},
          {"digest", digest},
          {"model_id", spec.model_id},
          {"temperature", spec.temperature},
          {"messages", std::move(msgs)}};
}

// Returns the cached response text, or nullopt when the entry is absent or
// unusable. `corrupt` is set when a file exists but cannot be trusted.
std::optional<std::string> read_entry(const fs::path& path, std::string_view digest,
                                      bool& corrupt) {
  corrupt = false;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    std::string request_line;
    std::string response_line;
    if (!std::getline(in, request_line) || !std::getline(in, response_line)) {
      corrupt = true;
      return std::nullopt;
    }
    json req = json::parse(request_line);
    json resp = json::parse(response_line);
    if (req.at("type") != "request" || req.at("digest") != digest ||
        resp.at("type") != "response") {
      corrupt = true;
      return std::nullopt;
    }
    return resp.at("text").get<std::string>();
  } catch (const json::exception&) {
    corrupt = true;
    return std::nullopt;
  }
}

void write_entry(const fs::path& path, const json& request, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry " + tmp.string());
    json response = {{"type", "response"}, {"text", text}};
    out << request.dump() << '\n' << response.dump() << '\n';
    if (!out) throw IoError("short write on cache entry " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot install cache entry " + path.string() + ": " + ec.message());
}

}  // namespace

CachedBackend::CachedBackend(BackendPtr inner, fs::path cache_dir)
    : inner_(std::move(inner)),
      cache_dir_(std::move(cache_dir)),
      locks_(std::make_unique<KeyLocks>()) {
  if (!inner_) throw ConfigError("with_cache: null backend");
  std::error_code ec;
  fs::create_directories(cache_dir_, ec);
  if (ec || !fs::is_directory(cache_dir_)) {
    throw IoError("cache directory not usable: " + cache_dir_.string());
  }
}

CachedBackend::~CachedBackend() = default;

fs::path CachedBackend::entry_path(std::string_view digest) const {
  return cache_dir_ / (std::string(digest) + ".jsonl");
}

CompletionRecord CachedBackend::complete(std::span<const ChatMessage> messages,
                                         const RequestTag& tag) const {
  const std::string digest = request_digest(inner_->spec(), messages);
  const fs::path path = entry_path(digest);

  std::lock_guard lock(locks_->for_key(digest));
  bool corrupt = false;
  if (auto text = read_entry(path, digest, corrupt)) {
    CompletionRecord rec;
    rec.request_digest = digest;
    rec.response_text = std::move(*text);
    rec.retrieved_from_cache = true;
    return rec;
  }
  if (corrupt) {
    log_warning("corrupt cache entry " + path.string() + ", recomputing");
  }
  CompletionRecord rec = inner_->complete(messages, tag);
  rec.request_digest = digest;
  rec.retrieved_from_cache = false;
  write_entry(path, request_record(inner_->spec(), digest, messages), rec.response_text);
  return rec;
}

BackendPtr with_cache(BackendPtr inner, const fs::path& cache_dir) {
  return std::make_shared<CachedBackend>(std::move(inner), cache_dir);
}

}  // namespace mldebias
