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

#include "mldebias/config.hpp"

#include <json.hpp>

#include "mldebias/error.hpp"
#include "mldebias/transcript_io.hpp"

namespace mldebias {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

ModelEntry model_from_json(const json& j, const fs::path& base) {
  ModelEntry e;
  ModelSpec& s = e.spec;
  s.name = j.at("name").get<std::string>();
  s.kind = parse_backend_kind(j.value("kind", std::string("http_chat")));
  s.endpoint = j.value("endpoint", s.endpoint);
  s.endpoint_path = j.value("endpoint_path", s.endpoint_path);
  s.api_key_env = j.value("api_key_env", s.api_key_env);
  s.model_id = j.value("model_id", s.model_id);
  s.temperature = j.value("temperature", s.temperature);
  if (j.contains("max_tokens")) {
    s.max_tokens = j["max_tokens"].is_null() ? std::nullopt
                                             : std::optional<int>(j["max_tokens"].get<int>());
  }
  s.request_timeout = std::chrono::milliseconds(j.value("timeout_ms", s.request_timeout.count()));
  s.max_retries = j.value("max_retries", s.max_retries);
  s.initial_backoff = std::chrono::milliseconds(j.value("backoff_ms", s.initial_backoff.count()));
  s.max_in_flight = j.value("max_in_flight", s.max_in_flight);
  e.script = resolve(base, j.value("script", std::string()));
  if (s.temperature < 0) throw ConfigError("model '" + s.name + "': negative temperature");
  if (s.max_retries < 0) throw ConfigError("model '" + s.name + "': negative max_retries");
  if (s.kind == BackendKind::kScripted && s.model_id.empty()) s.model_id = "scripted:" + s.name;
  return e;
}

json model_to_json(const ModelEntry& e) {
  const ModelSpec& s = e.spec;
  json j = {{"name", s.name},
            {"kind", to_string(s.kind)},
            {"model_id", s.model_id},
            {"temperature", s.temperature},
            {"max_tokens", s.max_tokens ? json(*s.max_tokens) : json(nullptr)},
            {"timeout_ms", s.request_timeout.count()},
            {"max_retries", s.max_retries},
            {"backoff_ms", s.initial_backoff.count()},
            {"max_in_flight", s.max_in_flight}};
  if (s.kind == BackendKind::kHttpChat) {
    j["endpoint"] = s.endpoint;
    j["endpoint_path"] = s.endpoint_path;
    j["api_key_env"] = s.api_key_env;
  } else {
    j["script"] = e.script.generic_string();
  }
  return j;
}

}  // namespace

ModelEntry parse_model_entry(std::string_view json_text, const fs::path& base_dir) {
  try {
    return model_from_json(json::parse(json_text), base_dir);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad model entry: ") + ex.what());
  }
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  RunConfig cfg;
  try {
    json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("dataset")) cfg.dataset = resolve(base_dir, j["dataset"].get<std::string>());
    if (j.contains("groups")) {
      for (const auto& g : j["groups"]) {
        try {
          cfg.groups.push_back(parse_social_group(g.get<std::string>()));
        } catch (const ParseError& e) {
          throw ConfigError(e.what());
        }
      }
    }
    if (j.contains("topology")) cfg.topology = parse_topology(j["topology"].get<std::string>());
    if (j.contains("models")) {
      for (const auto& m : j["models"]) cfg.models.push_back(model_from_json(m, base_dir));
    }
    cfg.rounds = j.value("rounds", cfg.topology == Topology::kBaseline ? 1 : 3);
    if (j.contains("variant")) cfg.variant = parse_prompt_variant(j["variant"].get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("subset_size") && !j["subset_size"].is_null()) {
      cfg.subset_size = j["subset_size"].get<std::size_t>();
    }
    cfg.chain_leaves = j.value("chain_leaves", cfg.chain_leaves);
    cfg.parallel_calls = j.value("parallel_calls", cfg.parallel_calls);
    if (j.contains("cache_dir")) cfg.cache_dir = resolve(base_dir, j["cache_dir"].get<std::string>());
    if (j.contains("output_dir")) {
      cfg.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    }
    cfg.run_name = j.value("run_name", cfg.run_name);
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad config: ") + ex.what());
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_run_config(text, path.parent_path());
}

std::string dump_run_config(const RunConfig& cfg) {
  json groups = json::array();
  for (SocialGroup g : cfg.groups) groups.push_back(upstream_category(g));
  json models = json::array();
  for (const auto& m : cfg.models) models.push_back(model_to_json(m));
  json j = {{"dataset", cfg.dataset.generic_string()},
            {"groups", std::move(groups)},
            {"topology", to_string(cfg.topology)},
            {"models", std::move(models)},
            {"rounds", cfg.rounds},
            {"variant", to_string(cfg.variant)},
            {"seed", cfg.seed},
            {"subset_size", cfg.subset_size ? json(*cfg.subset_size) : json(nullptr)},
            {"chain_leaves", cfg.chain_leaves},
            {"parallel_calls", cfg.parallel_calls},
            {"cache_dir", cfg.cache_dir.generic_string()},
            {"output_dir", cfg.output_dir.generic_string()},
            {"run_name", cfg.run_name},
            {"parallelism", cfg.parallelism}};
  return j.dump(2) + "\n";
}

void validate(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset given");
  if (cfg.models.empty()) throw ConfigError("no models configured");
  if (cfg.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (cfg.topology == Topology::kBaseline) {
    if (cfg.models.size() != 1) throw ConfigError("baseline runs take exactly one model");
    if (cfg.rounds != 1) throw ConfigError("baseline runs take exactly one round");
  } else if (cfg.models.size() < 2) {
    throw ConfigError(std::string(to_string(cfg.topology)) + " runs need at least two models");
  }
  if (cfg.rounds < 1) throw ConfigError("rounds must be at least 1");
  for (const auto& m : cfg.models) {
    if (m.spec.kind == BackendKind::kScripted && m.script.empty()) {
      throw ConfigError("scripted model '" + m.spec.name + "' has no script file");
    }
  }
}

BackendPtr make_model_backend(const ModelEntry& entry, const fs::path& cache_dir) {
  BackendPtr backend;
  if (entry.spec.kind == BackendKind::kScripted) {
    const Script script = Script::from_file(entry.script);
    backend = make_backend(entry.spec, &script);
  } else {
    backend = make_backend(entry.spec);
  }
  if (!cache_dir.empty()) backend = with_cache(std::move(backend), cache_dir);
  return backend;
}

ProtocolConfig make_protocol_config(const RunConfig& cfg) {
  ProtocolConfig p;
  for (const auto& m : cfg.models) p.models.push_back(make_model_backend(m, cfg.cache_dir));
  p.max_rounds = cfg.rounds;
  p.variant = cfg.variant;
  p.centralized_subset_size = cfg.subset_size;
  p.seed = cfg.seed;
  p.chain_leaves = cfg.chain_leaves;
  p.parallel_calls = cfg.parallel_calls;
  validate(p, cfg.topology);
  return p;
}

}  // namespace mldebias
