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

#include <string>
#include <utility>

#include "mmplan/model/errors.hpp"

namespace mmplan::gateway {

// Connection reset, timeout, 5xx. The only failure class that is retried.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error("TransportError", message) {}
};

class BackendUnavailable : public Error {
 public:
  explicit BackendUnavailable(const std::string& message)
      : Error("BackendUnavailable", message) {}
};

// The backend answered but the answer cannot be used. The raw response body
// is kept for audit.
class BackendRefused : public Error {
 public:
  BackendRefused(const std::string& message, std::string raw_body)
      : Error("BackendRefused", message), raw_body_(std::move(raw_body)) {}

  const std::string& raw_body() const noexcept { return raw_body_; }

 private:
  std::string raw_body_;
};

class ContextOverflow : public Error {
 public:
  explicit ContextOverflow(const std::string& message) : Error("ContextOverflow", message) {}
};

class UnknownModel : public Error {
 public:
  explicit UnknownModel(const std::string& model_id)
      : Error("UnknownModel", "no chat backend configured for model " + model_id) {}
};

class CaptionerUnavailable : public Error {
 public:
  explicit CaptionerUnavailable(const std::string& message)
      : Error("CaptionerUnavailable", message) {}
};

class UnreadableSidecar : public Error {
 public:
  explicit UnreadableSidecar(const std::string& message) : Error("UnreadableSidecar", message) {}
};

class UnknownJob : public Error {
 public:
  explicit UnknownJob(const std::string& job_id) : Error("UnknownJob", "unknown job " + job_id) {}
};

class GeneratorUnavailable : public Error {
 public:
  explicit GeneratorUnavailable(const std::string& message)
      : Error("GeneratorUnavailable", message) {}
};

class ScorerUnavailable : public Error {
 public:
  explicit ScorerUnavailable(const std::string& message) : Error("ScorerUnavailable", message) {}
};

}  // namespace mmplan::gateway
