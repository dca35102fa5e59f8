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

// Backend interfaces for the four external capabilities, plus the
// deterministic stubs used by tests and offline runs.
//
// Backends report transient trouble by throwing TransportError; the gateway
// owns retries and caching, so implementations stay stateless where they can.

#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "mmplan/gateway/requests.hpp"

namespace mmplan::gateway {

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const ChatRequest& request) = 0;
};

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string id() const = 0;
  virtual model::CaptionTrack caption(const CaptionRequest& request) = 0;
};

class VideoGenerator {
 public:
  virtual ~VideoGenerator() = default;
  virtual std::string id() const = 0;
  virtual void submit(const std::string& job_id, const VideoJobRequest& request) = 0;
  virtual VideoJobStatus poll(const std::string& job_id) = 0;
};

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual std::string id() const = 0;
  virtual double score(const SimilarityRequest& request) = 0;
};

// Answers with a caller-supplied function. Counts invocations.
class FunctionChat : public ChatBackend {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  FunctionChat(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}

  std::string id() const override { return id_; }
  std::string complete(const ChatRequest& request) override {
    ++calls_;
    return fn_(request);
  }
  int calls() const { return calls_; }

 private:
  std::string id_;
  Fn fn_;
  std::atomic<int> calls_{0};
};

// Replays canned completions in order; the last one repeats once the queue
// runs dry.
class ScriptedChat : public ChatBackend {
 public:
  ScriptedChat(std::string id, std::vector<std::string> responses);

  std::string id() const override { return id_; }
  std::string complete(const ChatRequest& request) override;

  int calls() const { return calls_; }
  std::vector<std::string> prompts() const;

 private:
  std::string id_;
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  std::string last_;
  std::vector<std::string> prompts_;
  int calls_ = 0;
};

// Synthesizes 3 to 5 plausible segments from a hash of the uri and seed.
class StubCaptioner : public Captioner {
 public:
  explicit StubCaptioner(std::uint64_t seed) : seed_(seed) {}

  std::string id() const override;
  model::CaptionTrack caption(const CaptionRequest& request) override;

 private:
  std::uint64_t seed_;
};

// Each job reports Pending until it has been polled polls_to_done times,
// then Done with artifact "stub://video/{job_id}.mp4". Prompts matched by
// the failure predicate end Failed instead.
class StubVideoGenerator : public VideoGenerator {
 public:
  explicit StubVideoGenerator(std::uint64_t seed, int polls_to_done = 2)
      : seed_(seed), polls_to_done_(polls_to_done) {}

  std::string id() const override;
  void submit(const std::string& job_id, const VideoJobRequest& request) override;
  VideoJobStatus poll(const std::string& job_id) override;

  void fail_when(std::function<bool(const VideoJobRequest&)> predicate);
  // Submissions matching the predicate throw TransportError (generator down).
  void refuse_when(std::function<bool(const VideoJobRequest&)> predicate);
  int submissions() const;

 private:
  struct Job {
    VideoJobRequest request;
    int polls = 0;
  };
  std::uint64_t seed_;
  int polls_to_done_;
  mutable std::mutex mu_;
  std::map<std::string, Job> jobs_;
  std::function<bool(const VideoJobRequest&)> fail_;
  std::function<bool(const VideoJobRequest&)> refuse_;
  int submissions_ = 0;
};

class ConstantScorer : public SimilarityScorer {
 public:
  explicit ConstantScorer(double value) : value_(value) {}
  std::string id() const override;
  double score(const SimilarityRequest&) override { return value_; }

 private:
  double value_;
};

// Uniform in [0, 1) from a hash of (seed, image_ref, text).
class HashScorer : public SimilarityScorer {
 public:
  explicit HashScorer(std::uint64_t seed) : seed_(seed) {}
  std::string id() const override;
  double score(const SimilarityRequest& request) override;

 private:
  std::uint64_t seed_;
};

// Looks the frame up in a fixed table; unknown frames are a transport error.
class TableScorer : public SimilarityScorer {
 public:
  explicit TableScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
  std::string id() const override { return "stub-table"; }
  double score(const SimilarityRequest& request) override;

 private:
  std::map<std::string, double> table_;
};

}  // namespace mmplan::gateway
