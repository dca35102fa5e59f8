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

// Network backends.
//
// Chat speaks the OpenAI-style message API (POST {endpoint}/v1/chat/completions)
// that llama.cpp server, Ollama, vLLM and hosted APIs all expose. The other
// three capabilities use a small JSON protocol:
//
//   POST {endpoint}/caption      {"uri", "modalities"} -> {"segments": [{"start_sec", "end_sec", "text"}]}
//   POST {endpoint}/jobs         {"job_id", "prompt", "duration_sec", "seed"} -> 2xx
//   GET  {endpoint}/jobs/{id}    -> {"status", "artifact_uri"?, "error"?}
//   POST {endpoint}/similarity   {"image", "text"} -> {"score"}
//
// Auth tokens are read from the named environment variable on every call and
// sent as a bearer header. They are never stored.

#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

#include "mmplan/gateway/backends.hpp"

namespace mmplan::gateway {

struct HttpOptions {
  std::string endpoint;  // "http://host:port" with an optional path prefix
  std::string auth_env;  // empty for none
  std::chrono::seconds timeout{120};
};

// Sends one request and maps failures: no connection, 429 and 5xx become
// TransportError; a 4xx that mentions the context window becomes
// ContextOverflow; any other non-2xx or non-JSON body becomes BackendRefused.
nlohmann::json http_json(const HttpOptions& options, const std::string& method,
                         const std::string& path, const nlohmann::json* body);

class HttpChat : public ChatBackend {
 public:
  explicit HttpChat(HttpOptions options) : options_(std::move(options)) {}
  std::string id() const override { return "http:" + options_.endpoint; }
  std::string complete(const ChatRequest& request) override;

 private:
  HttpOptions options_;
};

class HttpCaptioner : public Captioner {
 public:
  explicit HttpCaptioner(HttpOptions options) : options_(std::move(options)) {}
  std::string id() const override { return "http:" + options_.endpoint; }
  model::CaptionTrack caption(const CaptionRequest& request) override;

 private:
  HttpOptions options_;
};

class HttpVideoGenerator : public VideoGenerator {
 public:
  explicit HttpVideoGenerator(HttpOptions options) : options_(std::move(options)) {}
  std::string id() const override { return "http:" + options_.endpoint; }
  void submit(const std::string& job_id, const VideoJobRequest& request) override;
  VideoJobStatus poll(const std::string& job_id) override;

 private:
  HttpOptions options_;
};

class HttpScorer : public SimilarityScorer {
 public:
  explicit HttpScorer(HttpOptions options) : options_(std::move(options)) {}
  std::string id() const override { return "http:" + options_.endpoint; }
  double score(const SimilarityRequest& request) override;

 private:
  HttpOptions options_;
};

}  // namespace mmplan::gateway
