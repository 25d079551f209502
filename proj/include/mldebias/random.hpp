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
#include <random>
#include <string_view>

namespace mldebias {

// Uniform integer in [0, n) by rejection sampling on raw engine output, so
// sequences are identical across standard library implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % n + 1) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x <= limit) return x % n;
  }
}

// Mixes a run seed with a string key (FNV-1a), giving each question its own
// independent stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace mldebias
