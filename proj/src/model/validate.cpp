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

#include "mmplan/model/validate.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mmplan::model {
namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void require_text(ValidationReport& r, const std::string& value, const std::string& path) {
  if (blank(value)) r.add(code::kEmptyField, path, "must be nonempty");
}

std::string at(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

// Indices must run 1..n in order.
template <class Step>
void check_indices(ValidationReport& r, const std::vector<Step>& steps) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].index != static_cast<int>(i + 1)) {
      r.add(code::kNonContiguousIndex, at("/steps", i) + "/index",
            "expected " + std::to_string(i + 1) + ", got " + std::to_string(steps[i].index));
    }
  }
}

void nest(ValidationReport& r, const ValidationReport& inner, const std::string& prefix) {
  for (const auto& v : inner.violations) r.add(v.code, prefix + v.path, v.message);
}

}  // namespace

bool ValidationReport::has(std::string_view c) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == c; });
}

void ValidationReport::add(std::string_view c, std::string path, std::string message) {
  violations.push_back({std::string(c), std::move(path), std::move(message)});
}

void ValidationReport::merge(const ValidationReport& other) {
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.code << " at " << (v.path.empty() ? "/" : v.path) << ": " << v.message << "\n";
  }
  return out.str();
}

ValidationReport validate(const VideoRef& v) {
  ValidationReport r;
  require_text(r, v.uri, "/uri");
  if (v.duration_sec && !(*v.duration_sec > 0)) {
    r.add(code::kNonPositiveDuration, "/duration_sec", "must be > 0 when present");
  }
  return r;
}

ValidationReport validate(const TaskSpec& t, const ValidationOptions& options) {
  ValidationReport r;
  require_text(r, t.id, "/id");
  require_text(r, t.title, "/title");
  const std::size_t n = t.video_refs.size();
  if (t.kind == TaskKind::Seen) {
    bool ok = options.video_count == VideoCountPolicy::Range7To10 ? (n >= 7 && n <= 10)
                                                                  : (n == 7 || n == 10);
    if (!ok) {
      r.add(code::kVideoCountOutOfRange, "/video_refs",
            "seen task has " + std::to_string(n) + " videos");
    }
    if (!t.related_seen.empty()) {
      r.add(code::kSeenHasRelated, "/related_seen", "seen task must not list related tasks");
    }
  } else {
    if (n != 0) r.add(code::kUnseenHasVideos, "/video_refs", "unseen task must not have videos");
    if (t.related_seen.size() != 2) {
      r.add(code::kRelatedSeenCardinality, "/related_seen",
            "unseen task needs exactly 2 related seen tasks, has " +
                std::to_string(t.related_seen.size()));
    }
  }
  for (std::size_t i = 0; i < n; ++i) nest(r, validate(t.video_refs[i]), at("/video_refs", i));
  return r;
}

ValidationReport validate(const InferenceParams& p) {
  ValidationReport r;
  if (!(p.temperature >= 0)) r.add(code::kParamOutOfRange, "/temperature", "must be >= 0");
  if (p.top_k < 1) r.add(code::kParamOutOfRange, "/top_k", "must be >= 1");
  if (!(p.top_p > 0 && p.top_p <= 1)) r.add(code::kParamOutOfRange, "/top_p", "must be in (0, 1]");
  if (!(p.min_p >= 0 && p.min_p < 1)) r.add(code::kParamOutOfRange, "/min_p", "must be in [0, 1)");
  if (p.n_ctx <= 0) r.add(code::kParamOutOfRange, "/n_ctx", "must be > 0");
  if (p.n_batch <= 0) r.add(code::kParamOutOfRange, "/n_batch", "must be > 0");
  return r;
}

ValidationReport validate(const Provenance& p) {
  ValidationReport r;
  if (blank(p.backend_id) || blank(p.model_id) || blank(p.prompt_digest)) {
    r.add(code::kMissingProvenance, "", "backend_id, model_id and prompt_digest are required");
  }
  nest(r, validate(p.params), "/params");
  return r;
}

ValidationReport validate(const VanillaTextPlan& plan) {
  ValidationReport r;
  require_text(r, plan.task_id, "/task_id");
  if (plan.steps.empty()) r.add(code::kNoSteps, "/steps", "plan has no steps");
  check_indices(r, plan.steps);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    require_text(r, plan.steps[i].text, at("/steps", i) + "/text");
  }
  nest(r, validate(plan.provenance), "/provenance");
  return r;
}

ValidationReport validate(const CaptionTrack& track) {
  ValidationReport r;
  for (std::size_t i = 0; i < track.segments.size(); ++i) {
    const auto& s = track.segments[i];
    const auto path = at("/segments", i);
    if (!(s.start_sec >= 0 && s.start_sec < s.end_sec)) {
      r.add(code::kInvalidTimeRange, path, "requires 0 <= start_sec < end_sec");
    }
    require_text(r, s.text, path + "/text");
    if (s.video_index != track.video_index) {
      r.add(code::kVideoIndexMismatch, path + "/video_index", "segment belongs to another track");
    }
    if (i > 0 && track.segments[i - 1].start_sec > s.start_sec) {
      r.add(code::kSegmentsUnsorted, path, "segments must ascend by start_sec");
    }
  }
  return r;
}

ValidationReport validate(const CaptionSet& set) {
  ValidationReport r;
  require_text(r, set.task_id, "/task_id");
  if (set.origins.size() != set.tracks.size()) {
    r.add(code::kStepParity, "/origins", "origins must parallel tracks");
  }
  for (std::size_t i = 0; i < set.tracks.size(); ++i) {
    nest(r, validate(set.tracks[i]), at("/tracks", i));
  }
  return r;
}

ValidationReport validate(const FusedCaption& foc) {
  ValidationReport r;
  require_text(r, foc.task_id, "/task_id");
  if (foc.steps.empty()) r.add(code::kNoSteps, "/steps", "fused caption has no steps");
  for (std::size_t i = 0; i < foc.steps.size(); ++i) {
    require_text(r, foc.steps[i].sentence, at("/steps", i) + "/sentence");
  }
  nest(r, validate(foc.provenance), "/provenance");
  return r;
}

ValidationReport validate(const FusedCaption& foc, std::span<const CaptionTrack> tracks) {
  ValidationReport r = validate(foc);
  for (std::size_t i = 0; i < foc.steps.size(); ++i) {
    const auto& sources = foc.steps[i].sources;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const auto& src = sources[k];
      auto it = std::find_if(tracks.begin(), tracks.end(), [&](const CaptionTrack& t) {
        return t.video_index == src.video_index;
      });
      bool ok = it != tracks.end() && src.segment_index >= 0 &&
                src.segment_index < static_cast<int>(it->segments.size());
      if (!ok) {
        r.add(code::kUnresolvedSource, at(at("/steps", i) + "/sources", k),
              "no segment " + std::to_string(src.segment_index) + " in video " +
                  std::to_string(src.video_index));
      }
    }
  }
  return r;
}

ValidationReport validate(const GroundedPlan& plan) {
  ValidationReport r;
  require_text(r, plan.task_id, "/task_id");
  if (plan.steps.empty()) r.add(code::kNoSteps, "/steps", "plan has no steps");
  check_indices(r, plan.steps);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto path = at("/steps", i);
    require_text(r, plan.steps[i].text, path + "/text");
    require_text(r, plan.steps[i].context, path + "/context");
    require_text(r, plan.steps[i].visual, path + "/visual");
  }
  nest(r, validate(plan.provenance), "/provenance");
  return r;
}

ValidationReport validate(const VideoPlanItem& item) {
  ValidationReport r;
  bool done = item.status == JobStatus::Done;
  bool has_artifact = item.artifact_uri.has_value() && !item.artifact_uri->empty();
  if (done != has_artifact) {
    r.add(code::kStatusArtifactMismatch, "/artifact_uri",
          "artifact_uri must be present exactly when status is done");
  }
  require_text(r, item.prompt_used, "/prompt_used");
  return r;
}

ValidationReport validate(const GoalPlan& plan) {
  ValidationReport r;
  require_text(r, plan.task_id, "/task_id");
  const bool grounded = std::holds_alternative<GroundedPlan>(plan.text_plan);
  if (grounded != (plan.arm == Arm::VGTVP)) {
    r.add(code::kArmPlanMismatch, "/text_plan",
          "vgtvp arm carries a grounded plan, baseline arm a vanilla plan");
  }
  ValidationReport inner =
      std::visit([](const auto& p) { return validate(p); }, plan.text_plan);
  nest(r, inner, "/text_plan");
  const std::string& inner_task =
      std::visit([](const auto& p) -> const std::string& { return p.task_id; }, plan.text_plan);
  if (inner_task != plan.task_id) {
    r.add(code::kTaskIdMismatch, "/text_plan/task_id", "differs from goal plan task_id");
  }
  const std::size_t n = plan.step_count();
  if (plan.video_plan.size() != n) {
    r.add(code::kStepParity, "/video_plan",
          std::to_string(plan.video_plan.size()) + " video items for " + std::to_string(n) +
              " steps");
  }
  for (std::size_t i = 0; i < plan.video_plan.size(); ++i) {
    const auto& item = plan.video_plan[i];
    nest(r, validate(item), at("/video_plan", i));
    if (item.step_index < 1 || item.step_index > static_cast<int>(n)) {
      r.add(code::kStepIndexUnresolved, at("/video_plan", i) + "/step_index",
            "no step " + std::to_string(item.step_index));
    }
  }
  return r;
}

ValidationReport validate(const Judgment& j) {
  ValidationReport r;
  require_text(r, j.subject_id, "/subject_id");
  require_text(r, j.comparison_id, "/comparison_id");
  return r;
}

}  // namespace mmplan::model
