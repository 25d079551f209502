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

#include <stdexcept>
#include <string>

namespace mldebias {

// All library failures derive from Error. The CLI maps each subclass to a
// distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File missing, unreadable, unwritable, or corrupt on disk.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input record (bad schema, unknown category, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Model backend failed terminally (retries exhausted, non-retryable status,
// missing script entry).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Inputs that are individually valid but inconsistent with each other.
class DataMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace mldebias
