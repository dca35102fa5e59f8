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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmplan/gateway/gateway.hpp"
#include "mmplan/model/errors.hpp"
#include "mmplan/model/types.hpp"

namespace mmplan::metrics {

class EmptyReference : public Error {
 public:
  EmptyReference() : Error("EmptyReference", "bleu needs at least one reference") {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& which)
      : Error("EmptyInput", "meteor needs a nonempty " + which) {}
};

class EmptySample : public Error {
 public:
  explicit EmptySample(model::Aspect aspect)
      : Error("EmptySample", "no judgments for aspect " + std::string(model::to_string(aspect))),
        aspect_(aspect) {}
  model::Aspect aspect() const noexcept { return aspect_; }

 private:
  model::Aspect aspect_;
};

class NoFrames : public Error {
 public:
  explicit NoFrames(const std::string& artifact)
      : Error("NoFrames", "no frames sampled from " + artifact) {}
};

using Tokens = std::vector<std::string>;

// Lowercase; alphanumeric runs (with inner apostrophes) become tokens.
Tokens tokenize(std::string_view text);

enum class Smoothing { None, AddOne };

struct BleuConfig {
  int max_n = 4;
  Smoothing smoothing = Smoothing::AddOne;
};

// Sentence BLEU: clipped n-gram precisions, geometric mean, brevity penalty
// against the closest reference length (shorter wins ties).
double bleu(const Tokens& candidate, std::span<const Tokens> references,
            const BleuConfig& config = {});

struct MeteorConfig {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  bool stem_stage = true;
};

struct MeteorDetail {
  int matches = 0;
  int chunks = 0;
  double precision = 0;
  double recall = 0;
  double f_mean = 0;
  double penalty = 0;
  double score = 0;
};

// Exact then Porter-stem matching, no synonym stage.
MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference,
                           const MeteorConfig& config = {});
double meteor(const Tokens& candidate, const Tokens& reference, const MeteorConfig& config = {});

// Percentage held as integer hundredths, rounded half-up.
struct Percent {
  long long hundredths = 0;

  double value() const { return static_cast<double>(hundredths) / 100.0; }
  std::string str() const;  // "44.00"
  bool operator==(const Percent&) const = default;
};

Percent percent_half_up(long long count, long long total);

struct PreferenceTally {
  model::Aspect aspect = model::Aspect::TextualInformative;
  long long win = 0;  // arm A (VG-TVP) preferred
  long long tie = 0;
  long long lose = 0;

  long long total() const { return win + tie + lose; }
};

struct PreferenceShare {
  PreferenceTally tally;
  Percent win, tie, lose;
};

PreferenceShare share(const PreferenceTally& tally);
// Every aspect must have at least one judgment.
std::map<model::Aspect, PreferenceShare> aggregate_preferences(
    std::span<const model::Judgment> judgments);

enum class FrameSampling { Stride, Fps };

struct MssConfig {
  int frame_rate = 20;
  FrameSampling sampling = FrameSampling::Stride;
  int max_parallel = 4;
};

bool is_declared_frame_rate(int frame_rate);

struct FrameInfo {
  int frame_count = 0;
  double fps = 0;
};

// Frame access for one video artifact.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual FrameInfo info(const std::string& artifact_uri) = 0;
  virtual std::string frame_ref(const std::string& artifact_uri, int index) = 0;
};

// Deterministic stand-in: every artifact has frame_count frames at fps.
class SyntheticFrameSource : public FrameSource {
 public:
  SyntheticFrameSource(int frame_count = 48, double fps = 24)
      : frame_count_(frame_count), fps_(fps) {}
  FrameInfo info(const std::string&) override { return {frame_count_, fps_}; }
  std::string frame_ref(const std::string& artifact_uri, int index) override;

 private:
  int frame_count_;
  double fps_;
};

// Frames listed in "<artifact path>.frames.json": {"fps": r, "frames": [ref, ...]}.
class ListedFrameSource : public FrameSource {
 public:
  FrameInfo info(const std::string& artifact_uri) override;
  std::string frame_ref(const std::string& artifact_uri, int index) override;

 private:
  const std::vector<std::string>& frames(const std::string& artifact_uri, double* fps);
  std::map<std::string, std::pair<double, std::vector<std::string>>> loaded_;
};

// Stride: every frame_rate-th frame starting at 0. Fps: frames nearest to
// k / frame_rate seconds.
std::vector<int> sample_frames(const FrameInfo& info, const MssConfig& config);

struct MssResult {
  double value = 0;
  std::vector<double> frame_scores;
  std::vector<std::string> warnings;
};

MssResult mss(const std::string& artifact_uri, const std::string& prompt, const MssConfig& config,
              FrameSource& frames, gateway::Gateway& gateway);
double mean(std::span<const double> values);

// Nine decimals, the precision used in reports.
std::string format_report(double value);

struct MetricRow {
  std::string task_id;
  model::Arm arm = model::Arm::VGTVP;
  std::string metric;
  double value = 0;
};

// "task_id,arm,metric,value" with shortest round-trip values.
std::string to_csv(std::span<const MetricRow> rows);

}  // namespace mmplan::metrics
