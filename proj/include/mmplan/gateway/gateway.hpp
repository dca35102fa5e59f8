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

// Uniform client over chat, captioning, video generation and similarity
// scoring. Every call goes through the response cache; transport failures
// are retried with exponential backoff. A Gateway is safe to share between
// worker threads.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mmplan/gateway/backends.hpp"
#include "mmplan/gateway/cache.hpp"
#include "mmplan/gateway/requests.hpp"

namespace mmplan::gateway {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  // Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct GatewayStats {
  int cache_hits = 0;
  int cache_misses = 0;
  // "<capability>:<key>" per backend invocation, in call order. Polls are
  // recorded as "video_poll:<job_id>".
  std::vector<std::string> backend_calls;
  std::vector<std::string> warnings;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<ResponseCache> cache = std::make_shared<MemoryCache>());

  void add_chat(const std::string& model_id, std::shared_ptr<ChatBackend> backend);
  void set_captioner(std::shared_ptr<Captioner> captioner);
  // When set, a "{stem}.captions.csv" file in this directory takes precedence
  // over the captioner and bypasses the network and the cache.
  void set_sidecar_dir(std::filesystem::path dir);
  void set_video_generator(std::shared_ptr<VideoGenerator> generator);
  void set_scorer(std::shared_ptr<SimilarityScorer> scorer);
  void set_retry(RetryPolicy policy);

  bool has_model(const std::string& model_id) const;
  std::string chat_backend_id(const std::string& model_id) const;
  std::vector<std::string> models() const;

  ChatResponse chat(const ChatRequest& request);
  model::CaptionTrack caption(const CaptionRequest& request);
  // Identical requests map to the same job id; a resubmission returns the
  // existing job without contacting the generator.
  std::string submit_video(const VideoJobRequest& request);
  VideoJobStatus poll_video(const std::string& job_id);
  double similarity(const SimilarityRequest& request);

  GatewayStats stats() const;
  void reset_stats();

 private:
  template <class Fn, class MakeError>
  auto with_retry(Fn&& fn, MakeError&& make_error) -> decltype(fn());

  void record_call(std::string entry);
  void record_hit(bool hit);
  void warn(std::string message);

  std::shared_ptr<ResponseCache> cache_;
  std::map<std::string, std::shared_ptr<ChatBackend>> chat_;
  std::shared_ptr<Captioner> captioner_;
  std::optional<std::filesystem::path> sidecar_dir_;
  std::shared_ptr<VideoGenerator> generator_;
  std::shared_ptr<SimilarityScorer> scorer_;
  RetryPolicy retry_;

  mutable std::mutex mu_;
  GatewayStats stats_;
  std::map<std::string, std::string> jobs_;  // job_id -> cache key
};

}  // namespace mmplan::gateway
