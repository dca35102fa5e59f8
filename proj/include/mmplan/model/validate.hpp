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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmplan/model/types.hpp"

namespace mmplan::model {

// Stable violation codes.
namespace code {
inline constexpr std::string_view kEmptyField = "empty_field";
inline constexpr std::string_view kVideoCountOutOfRange = "video_count_out_of_range";
inline constexpr std::string_view kRelatedSeenCardinality = "related_seen_cardinality";
inline constexpr std::string_view kSeenHasRelated = "seen_has_related";
inline constexpr std::string_view kUnseenHasVideos = "unseen_has_videos";
inline constexpr std::string_view kNonPositiveDuration = "nonpositive_duration";
inline constexpr std::string_view kNoSteps = "no_steps";
inline constexpr std::string_view kNonContiguousIndex = "non_contiguous_index";
inline constexpr std::string_view kInvalidTimeRange = "invalid_time_range";
inline constexpr std::string_view kSegmentsUnsorted = "segments_unsorted";
inline constexpr std::string_view kVideoIndexMismatch = "video_index_mismatch";
inline constexpr std::string_view kUnresolvedSource = "unresolved_source";
inline constexpr std::string_view kStatusArtifactMismatch = "status_artifact_mismatch";
inline constexpr std::string_view kStepIndexUnresolved = "step_index_unresolved";
inline constexpr std::string_view kStepParity = "step_parity";
inline constexpr std::string_view kArmPlanMismatch = "arm_plan_mismatch";
inline constexpr std::string_view kTaskIdMismatch = "task_id_mismatch";
inline constexpr std::string_view kParamOutOfRange = "param_out_of_range";
inline constexpr std::string_view kMissingProvenance = "missing_provenance";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
inline constexpr std::string_view kDanglingRelated = "dangling_related";
inline constexpr std::string_view kRelatedNotSeen = "related_not_seen";
inline constexpr std::string_view kDomainSet = "domain_set";
}  // namespace code

struct Violation {
  std::string code;
  std::string path;  // JSON pointer into the serialized entity
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
  void add(std::string_view code, std::string path, std::string message);
  void merge(const ValidationReport& other);
  std::string summary() const;
};

// The published dataset description says seen tasks carry "7 or 10" videos
// in one place and "7 to 10" in another. Range is the default.
enum class VideoCountPolicy { Range7To10, Exactly7Or10 };

struct ValidationOptions {
  VideoCountPolicy video_count = VideoCountPolicy::Range7To10;
};

ValidationReport validate(const VideoRef& v);
ValidationReport validate(const TaskSpec& t, const ValidationOptions& options = {});
ValidationReport validate(const InferenceParams& p);
ValidationReport validate(const Provenance& p);
ValidationReport validate(const VanillaTextPlan& plan);
ValidationReport validate(const CaptionTrack& track);
ValidationReport validate(const CaptionSet& set);
ValidationReport validate(const FusedCaption& foc);
// Also checks that every source pair resolves to an existing segment.
ValidationReport validate(const FusedCaption& foc, std::span<const CaptionTrack> tracks);
ValidationReport validate(const GroundedPlan& plan);
ValidationReport validate(const VideoPlanItem& item);
ValidationReport validate(const GoalPlan& plan);
ValidationReport validate(const Judgment& j);

}  // namespace mmplan::model
