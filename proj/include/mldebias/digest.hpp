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

#include <string>
#include <string_view>

namespace mldebias {

// Hex-encoded SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// Incremental SHA-256 for hashing several pieces without concatenating.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  // Length-prefixed update, so that ("ab","c") and ("a","bc") differ.
  void update_field(std::string_view data);
  std::string hex_digest();

 private:
  void* ctx_;
};

}  // namespace mldebias
