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

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "mmplan/model/types.hpp"

namespace mmplan::gateway {

struct ChatRequest {
  std::string model_id;
  std::string system_prompt;
  std::string user_prompt;
  model::InferenceParams params;
  std::string template_version;  // part of the cache key only
};

struct ChatResponse {
  std::string text;  // verbatim backend payload
  std::string backend_id;
  double latency_ms = 0;
  bool cached = false;
};

enum class Modality { Image, Region, Audio };

struct CaptionRequest {
  std::string video_uri;
  int video_index = 0;
  std::set<Modality> modalities{Modality::Image, Modality::Region};
};

struct VideoJobRequest {
  std::string prompt;
  double duration_sec = 2.0;
  std::uint64_t seed = 0;
};

struct VideoJobStatus {
  std::string job_id;
  model::JobStatus status = model::JobStatus::Pending;
  std::optional<std::string> artifact_uri;
  std::optional<std::string> error;

  bool terminal() const {
    return status == model::JobStatus::Done || status == model::JobStatus::Failed;
  }
  bool operator==(const VideoJobStatus&) const = default;
};

struct SimilarityRequest {
  std::string image_ref;  // a frame locator
  std::string text;
};

}  // namespace mmplan::gateway
