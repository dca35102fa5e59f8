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

#include <array>
#include <cmath>

#include "mmplan/gateway/backends.hpp"
#include "mmplan/gateway/errors.hpp"
#include "mmplan/model/digest.hpp"

namespace mmplan::gateway {
namespace {

std::uint64_t mix(std::uint64_t seed, std::string_view a, std::string_view b = {}) {
  std::string buf = std::to_string(seed);
  buf += '\x1f';
  buf += a;
  buf += '\x1f';
  buf += b;
  return model::sha256_u64(buf);
}

constexpr std::array<std::string_view, 16> kScenes{
    "a person washing fresh produce in a sink",
    "hands arranging ingredients on a wooden counter",
    "a person cutting food on a cutting board with a knife",
    "a pot of water boiling on a stove",
    "a person stirring a mixture in a bowl",
    "a person pouring liquid into a glass",
    "a blender running with fruit inside",
    "a pan heating oil on the stove",
    "a person measuring ingredients with a spoon",
    "close up of food being plated",
    "a person holding a tool over a workbench",
    "a person folding fabric on a table",
    "a person tightening a bolt with a wrench",
    "a person wiping a surface with a cloth",
    "a finished dish on a white plate",
    "a person showing the final result to the camera",
};

}  // namespace

ScriptedChat::ScriptedChat(std::string id, std::vector<std::string> responses)
    : id_(std::move(id)), queue_(responses.begin(), responses.end()) {
  if (!queue_.empty()) last_ = queue_.back();
}

std::string ScriptedChat::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  prompts_.push_back(request.user_prompt);
  if (queue_.empty()) return last_;
  std::string out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

std::vector<std::string> ScriptedChat::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

std::string StubCaptioner::id() const { return "stub-captioner/seed-" + std::to_string(seed_); }

model::CaptionTrack StubCaptioner::caption(const CaptionRequest& request) {
  const std::uint64_t h = mix(seed_, request.video_uri);
  model::CaptionTrack track;
  track.video_index = request.video_index;
  const int n = 3 + static_cast<int>(h % 3);
  double t = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t hi = mix(h, std::to_string(i));
    model::CaptionSegment seg;
    seg.video_index = request.video_index;
    seg.start_sec = t;
    seg.end_sec = t + 4 + static_cast<double>(hi % 9);
    seg.text = std::string(kScenes[hi % kScenes.size()]);
    t = seg.end_sec;
    track.segments.push_back(std::move(seg));
  }
  return track;
}

std::string StubVideoGenerator::id() const {
  return "stub-t2v/seed-" + std::to_string(seed_);
}

void StubVideoGenerator::submit(const std::string& job_id, const VideoJobRequest& request) {
  std::lock_guard lock(mu_);
  if (refuse_ && refuse_(request)) throw TransportError("stub generator refused connection");
  ++submissions_;
  jobs_.emplace(job_id, Job{request, 0});
}

VideoJobStatus StubVideoGenerator::poll(const std::string& job_id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw UnknownJob(job_id);
  Job& job = it->second;
  ++job.polls;
  VideoJobStatus status;
  status.job_id = job_id;
  if (job.polls < polls_to_done_) {
    status.status = model::JobStatus::Pending;
  } else if (fail_ && fail_(job.request)) {
    status.status = model::JobStatus::Failed;
    status.error = "stub generator failure";
  } else {
    status.status = model::JobStatus::Done;
    status.artifact_uri = "stub://video/" + job_id + ".mp4";
  }
  return status;
}

void StubVideoGenerator::fail_when(std::function<bool(const VideoJobRequest&)> predicate) {
  std::lock_guard lock(mu_);
  fail_ = std::move(predicate);
}

void StubVideoGenerator::refuse_when(std::function<bool(const VideoJobRequest&)> predicate) {
  std::lock_guard lock(mu_);
  refuse_ = std::move(predicate);
}

int StubVideoGenerator::submissions() const {
  std::lock_guard lock(mu_);
  return submissions_;
}

std::string ConstantScorer::id() const { return "stub-constant/" + model::format_decimal(value_); }

std::string HashScorer::id() const { return "stub-hash/seed-" + std::to_string(seed_); }

double HashScorer::score(const SimilarityRequest& request) {
  return static_cast<double>(mix(seed_, request.image_ref, request.text) >> 11) * 0x1.0p-53;
}

double TableScorer::score(const SimilarityRequest& request) {
  auto it = table_.find(request.image_ref);
  if (it == table_.end()) throw TransportError("no score for frame " + request.image_ref);
  return it->second;
}

}  // namespace mmplan::gateway
