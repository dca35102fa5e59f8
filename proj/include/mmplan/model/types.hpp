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

// Domain types shared by the planning pipeline and the evaluation tools.
// Everything here is a plain value: construct, validate, serialize.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mmplan::model {

enum class Domain { Breakfast, Dinner, Drink, HobbyCrafts, HomeGarage };
enum class TaskKind { Seen, Unseen };
enum class JobStatus { Pending, Running, Done, Failed };
enum class Arm { VGTVP, Baseline };

// Human preference aspects. The same four aspects are used by the survey
// and by the LLM judge.
enum class Aspect { TextualInformative, VisualInformative, TemporalCoherence, PlanAccuracy };
inline constexpr Aspect kAllAspects[] = {Aspect::TextualInformative, Aspect::VisualInformative,
                                         Aspect::TemporalCoherence, Aspect::PlanAccuracy};

// Verdicts are always stored against canonical sides: A is the proposed
// method, B the comparison system.
enum class Verdict { WinA, Tie, WinB };

std::string_view to_string(Domain d);
std::string_view to_string(TaskKind k);
std::string_view to_string(JobStatus s);
std::string_view to_string(Arm a);
std::string_view to_string(Aspect a);
std::string_view to_string(Verdict v);

std::optional<Domain> parse_domain(std::string_view s);
std::optional<TaskKind> parse_task_kind(std::string_view s);
std::optional<JobStatus> parse_job_status(std::string_view s);
std::optional<Arm> parse_arm(std::string_view s);
std::optional<Aspect> parse_aspect(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);

struct VideoRef {
  std::string uri;
  std::optional<double> duration_sec;  // unknown is allowed

  bool operator==(const VideoRef&) const = default;
};

struct TaskSpec {
  std::string id;
  std::string title;
  Domain domain = Domain::Breakfast;
  TaskKind kind = TaskKind::Seen;
  std::vector<VideoRef> video_refs;       // Seen only
  std::vector<std::string> related_seen;  // Unseen only, exactly two ids

  bool operator==(const TaskSpec&) const = default;
};

// Sampling parameters. Defaults are the values used for every model in the
// published experiments, including the literal top_p of 0.095 (most likely
// a transposition of 0.95; shipped as-is, see README).
struct InferenceParams {
  double temperature = 0.8;
  int top_k = 40;
  double top_p = 0.095;
  double min_p = 0.05;
  int n_batch = 512;
  int n_ctx = 4096;
  std::string system_prompt = "You are a helpful AI assistant.";

  bool operator==(const InferenceParams&) const = default;
};

struct Provenance {
  std::string backend_id;
  std::string model_id;
  InferenceParams params;
  std::string prompt_digest;  // sha256 of the fully rendered prompt
  std::string template_version;
  std::string created_at;  // ISO-8601 UTC
  // Seen tasks whose captions fed this artifact (caption-derived stages only).
  std::vector<std::string> source_task_ids;

  bool operator==(const Provenance&) const = default;
};

struct VanillaStep {
  int index = 0;  // 1-based
  std::string text;
  std::string context;

  bool operator==(const VanillaStep&) const = default;
};

struct VanillaTextPlan {
  std::string task_id;
  std::vector<VanillaStep> steps;
  Provenance provenance;

  bool operator==(const VanillaTextPlan&) const = default;
};

struct CaptionSegment {
  int video_index = 0;
  double start_sec = 0;
  double end_sec = 0;
  std::string text;

  bool operator==(const CaptionSegment&) const = default;
};

struct CaptionTrack {
  int video_index = 0;
  std::vector<CaptionSegment> segments;  // ascending start_sec

  bool operator==(const CaptionTrack&) const = default;
};

// Where a caption track came from: an unseen task borrows tracks from two
// seen tasks, so the track's own video_index (its position in the combined
// list) differs from its index within the source task.
struct TrackOrigin {
  std::string task_id;
  int video_index = 0;

  bool operator==(const TrackOrigin&) const = default;
};

// Output of the caption collection stage.
struct CaptionSet {
  std::string task_id;
  std::vector<std::string> source_task_ids;
  std::vector<CaptionTrack> tracks;
  std::vector<TrackOrigin> origins;  // parallel to tracks
  std::vector<std::string> warnings;

  bool operator==(const CaptionSet&) const = default;
};

struct SegmentRef {
  int video_index = 0;
  int segment_index = 0;

  bool operator==(const SegmentRef&) const = default;
};

struct FusedStep {
  std::string sentence;
  std::vector<SegmentRef> sources;

  bool operator==(const FusedStep&) const = default;
};

struct FusedCaption {
  std::string task_id;
  std::vector<FusedStep> steps;
  Provenance provenance;

  bool operator==(const FusedCaption&) const = default;
};

struct GroundedStep {
  int index = 0;
  std::string text;
  std::string context;
  std::string visual;  // prompt for the video generator

  bool operator==(const GroundedStep&) const = default;
};

struct GroundedPlan {
  std::string task_id;
  std::vector<GroundedStep> steps;
  Provenance provenance;

  bool operator==(const GroundedPlan&) const = default;
};

struct VideoPlanItem {
  int step_index = 0;
  std::string prompt_used;
  std::string job_id;
  JobStatus status = JobStatus::Pending;
  std::optional<std::string> artifact_uri;  // present iff Done
  std::optional<std::string> error;         // set for Failed items

  bool operator==(const VideoPlanItem&) const = default;
};

using TextPlan = std::variant<GroundedPlan, VanillaTextPlan>;

struct GoalPlan {
  std::string task_id;
  Arm arm = Arm::VGTVP;
  TextPlan text_plan;
  std::vector<VideoPlanItem> video_plan;

  std::size_t step_count() const;
  bool operator==(const GoalPlan&) const = default;
};

struct Judgment {
  std::string subject_id;
  std::string comparison_id;
  Aspect aspect = Aspect::TextualInformative;
  Verdict verdict = Verdict::Tie;
  std::string submitted_at;

  bool operator==(const Judgment&) const = default;
};

}  // namespace mmplan::model
