// Copyright 2026 The mmplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mmplan {

// Root of every error thrown by the library. `category()` is a stable,
// machine-readable name (the CLI prints it verbatim on failure).
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

// A document does not match the canonical schema. `path()` is a JSON
// pointer to the first offending field, e.g. "/steps/2/text".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error("SchemaError", path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// An operation was called with inputs that violate its precondition.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("PreconditionError", message) {}
};

}  // namespace mmplan
