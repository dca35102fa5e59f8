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

#include "mmplan/model/serialize.hpp"

namespace mmplan::model {
namespace {

using json_io::Reader;

template <class E, class Parse>
E read_enum(const Reader& r, const json& j, std::string_view key, const std::string& path,
            Parse parse) {
  std::string s = r.string(j, key, path);
  auto v = parse(s);
  if (!v) throw SchemaError(Reader::child(path, key), "unknown value \"" + s + "\"");
  return *v;
}

int read_int(const Reader& r, const json& j, std::string_view key, const std::string& path) {
  return static_cast<int>(r.integer(j, key, path));
}

template <class T>
json to_array(const std::vector<T>& items) {
  json arr = json::array();
  for (const auto& item : items) arr.push_back(to_value(item));
  return arr;
}

template <class T>
std::vector<T> from_array(const Reader& r, const json& j, std::string_view key,
                          const std::string& path) {
  const json& arr = r.array(j, key, path);
  const std::string base = Reader::child(path, key);
  std::vector<T> out(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) from_value(arr[i], Reader::child(base, i), r, out[i]);
  return out;
}

}  // namespace

json to_value(const SegmentRef& s) {
  return {{"video_index", s.video_index}, {"segment_index", s.segment_index}};
}

void from_value(const json& j, const std::string& path, const Reader& r, SegmentRef& out) {
  r.object(j, path);
  r.check_known(j, {"video_index", "segment_index"}, path);
  out.video_index = read_int(r, j, "video_index", path);
  out.segment_index = read_int(r, j, "segment_index", path);
}

json to_value(const FusedStep& s) {
  return {{"sentence", s.sentence}, {"sources", to_array(s.sources)}};
}

void from_value(const json& j, const std::string& path, const Reader& r, FusedStep& out) {
  r.object(j, path);
  r.check_known(j, {"sentence", "sources"}, path);
  out.sentence = r.string(j, "sentence", path);
  out.sources = from_array<SegmentRef>(r, j, "sources", path);
}

json to_value(const TrackOrigin& o) { return {{"task_id", o.task_id}, {"video_index", o.video_index}}; }

void from_value(const json& j, const std::string& path, const Reader& r, TrackOrigin& out) {
  r.object(j, path);
  r.check_known(j, {"task_id", "video_index"}, path);
  out.task_id = r.string(j, "task_id", path);
  out.video_index = read_int(r, j, "video_index", path);
}


json to_value(const VideoRef& v) {
  json j = {{"uri", v.uri}};
  if (v.duration_sec) j["duration_sec"] = *v.duration_sec;
  return j;
}

void from_value(const json& j, const std::string& path, const Reader& r, VideoRef& out) {
  r.object(j, path);
  r.check_known(j, {"uri", "duration_sec"}, path);
  out.uri = r.string(j, "uri", path);
  out.duration_sec = r.opt_number(j, "duration_sec", path);
}

json to_value(const TaskSpec& t) {
  return {{"id", t.id},
          {"title", t.title},
          {"domain", std::string(to_string(t.domain))},
          {"kind", std::string(to_string(t.kind))},
          {"video_refs", to_array(t.video_refs)},
          {"related_seen", t.related_seen}};
}

void from_value(const json& j, const std::string& path, const Reader& r, TaskSpec& out) {
  r.object(j, path);
  r.check_known(j, {"id", "title", "domain", "kind", "video_refs", "related_seen"}, path);
  out.id = r.string(j, "id", path);
  out.title = r.string(j, "title", path);
  out.domain = read_enum<Domain>(r, j, "domain", path, parse_domain);
  out.kind = read_enum<TaskKind>(r, j, "kind", path, parse_task_kind);
  out.video_refs = j.contains("video_refs") ? from_array<VideoRef>(r, j, "video_refs", path)
                                            : std::vector<VideoRef>{};
  out.related_seen = j.contains("related_seen") ? r.strings(j, "related_seen", path)
                                                : std::vector<std::string>{};
}

json to_value(const InferenceParams& p) {
  return {{"temperature", p.temperature}, {"top_k", p.top_k},     {"top_p", p.top_p},
          {"min_p", p.min_p},             {"n_batch", p.n_batch}, {"n_ctx", p.n_ctx},
          {"system_prompt", p.system_prompt}};
}

void from_value(const json& j, const std::string& path, const Reader& r, InferenceParams& out) {
  r.object(j, path);
  r.check_known(j, {"temperature", "top_k", "top_p", "min_p", "n_batch", "n_ctx", "system_prompt"},
                path);
  out.temperature = r.number(j, "temperature", path);
  out.top_k = read_int(r, j, "top_k", path);
  out.top_p = r.number(j, "top_p", path);
  out.min_p = r.number(j, "min_p", path);
  out.n_batch = read_int(r, j, "n_batch", path);
  out.n_ctx = read_int(r, j, "n_ctx", path);
  out.system_prompt = r.string(j, "system_prompt", path);
}

json to_value(const Provenance& p) {
  return {{"backend_id", p.backend_id},
          {"model_id", p.model_id},
          {"params", to_value(p.params)},
          {"prompt_digest", p.prompt_digest},
          {"template_version", p.template_version},
          {"created_at", p.created_at},
          {"source_task_ids", p.source_task_ids}};
}

void from_value(const json& j, const std::string& path, const Reader& r, Provenance& out) {
  r.object(j, path);
  r.check_known(j,
                {"backend_id", "model_id", "params", "prompt_digest", "template_version",
                 "created_at", "source_task_ids"},
                path);
  out.backend_id = r.string(j, "backend_id", path);
  out.model_id = r.string(j, "model_id", path);
  from_value(r.member(j, "params", path), Reader::child(path, "params"), r, out.params);
  out.prompt_digest = r.string(j, "prompt_digest", path);
  out.template_version = r.opt_string(j, "template_version", path).value_or("");
  out.created_at = r.string(j, "created_at", path);
  out.source_task_ids = j.contains("source_task_ids") ? r.strings(j, "source_task_ids", path)
                                                      : std::vector<std::string>{};
}

json to_value(const VanillaStep& s) {
  return {{"index", s.index}, {"text", s.text}, {"context", s.context}};
}

void from_value(const json& j, const std::string& path, const Reader& r, VanillaStep& out) {
  r.object(j, path);
  r.check_known(j, {"index", "text", "context"}, path);
  out.index = read_int(r, j, "index", path);
  out.text = r.string(j, "text", path);
  out.context = r.string(j, "context", path);
}

json to_value(const VanillaTextPlan& p) {
  return {{"task_id", p.task_id},
          {"steps", to_array(p.steps)},
          {"provenance", to_value(p.provenance)}};
}

void from_value(const json& j, const std::string& path, const Reader& r, VanillaTextPlan& out) {
  r.object(j, path);
  r.check_known(j, {"task_id", "steps", "provenance"}, path);
  out.task_id = r.string(j, "task_id", path);
  out.steps = from_array<VanillaStep>(r, j, "steps", path);
  from_value(r.member(j, "provenance", path), Reader::child(path, "provenance"), r,
             out.provenance);
}

json to_value(const CaptionSegment& s) {
  return {{"video_index", s.video_index},
          {"start_sec", s.start_sec},
          {"end_sec", s.end_sec},
          {"text", s.text}};
}

void from_value(const json& j, const std::string& path, const Reader& r, CaptionSegment& out) {
  r.object(j, path);
  r.check_known(j, {"video_index", "start_sec", "end_sec", "text"}, path);
  out.video_index = read_int(r, j, "video_index", path);
  out.start_sec = r.number(j, "start_sec", path);
  out.end_sec = r.number(j, "end_sec", path);
  out.text = r.string(j, "text", path);
}

json to_value(const CaptionTrack& t) {
  return {{"video_index", t.video_index}, {"segments", to_array(t.segments)}};
}

void from_value(const json& j, const std::string& path, const Reader& r, CaptionTrack& out) {
  r.object(j, path);
  r.check_known(j, {"video_index", "segments"}, path);
  out.video_index = read_int(r, j, "video_index", path);
  out.segments = from_array<CaptionSegment>(r, j, "segments", path);
}

json to_value(const CaptionSet& s) {
  return {{"task_id", s.task_id},
          {"source_task_ids", s.source_task_ids},
          {"tracks", to_array(s.tracks)},
          {"origins", to_array(s.origins)},
          {"warnings", s.warnings}};
}

void from_value(const json& j, const std::string& path, const Reader& r, CaptionSet& out) {
  r.object(j, path);
  r.check_known(j, {"task_id", "source_task_ids", "tracks", "origins", "warnings"}, path);
  out.task_id = r.string(j, "task_id", path);
  out.source_task_ids = r.strings(j, "source_task_ids", path);
  out.tracks = from_array<CaptionTrack>(r, j, "tracks", path);
  out.origins = from_array<TrackOrigin>(r, j, "origins", path);
  out.warnings =
      j.contains("warnings") ? r.strings(j, "warnings", path) : std::vector<std::string>{};
}

json to_value(const FusedCaption& f) {
  return {{"task_id", f.task_id},
          {"steps", to_array(f.steps)},
          {"provenance", to_value(f.provenance)}};
}

void from_value(const json& j, const std::string& path, const Reader& r, FusedCaption& out) {
  r.object(j, path);
  r.check_known(j, {"task_id", "steps", "provenance"}, path);
  out.task_id = r.string(j, "task_id", path);
  out.steps = from_array<FusedStep>(r, j, "steps", path);
  from_value(r.member(j, "provenance", path), Reader::child(path, "provenance"), r,
             out.provenance);
}

json to_value(const GroundedStep& s) {
  return {{"index", s.index}, {"text", s.text}, {"context", s.context}, {"visual", s.visual}};
}

void from_value(const json& j, const std::string& path, const Reader& r, GroundedStep& out) {
  r.object(j, path);
  r.check_known(j, {"index", "text", "context", "visual"}, path);
  out.index = read_int(r, j, "index", path);
  out.text = r.string(j, "text", path);
  out.context = r.string(j, "context", path);
  out.visual = r.string(j, "visual", path);
}

json to_value(const GroundedPlan& p) {
  return {{"task_id", p.task_id},
          {"steps", to_array(p.steps)},
          {"provenance", to_value(p.provenance)}};
}

void from_value(const json& j, const std::string& path, const Reader& r, GroundedPlan& out) {
  r.object(j, path);
  r.check_known(j, {"task_id", "steps", "provenance"}, path);
  out.task_id = r.string(j, "task_id", path);
  out.steps = from_array<GroundedStep>(r, j, "steps", path);
  from_value(r.member(j, "provenance", path), Reader::child(path, "provenance"), r,
             out.provenance);
}

json to_value(const VideoPlanItem& i) {
  json j = {{"step_index", i.step_index},
            {"prompt_used", i.prompt_used},
            {"job_id", i.job_id},
            {"status", std::string(to_string(i.status))}};
  if (i.artifact_uri) j["artifact_uri"] = *i.artifact_uri;
  if (i.error) j["error"] = *i.error;
  return j;
}

void from_value(const json& j, const std::string& path, const Reader& r, VideoPlanItem& out) {
  r.object(j, path);
  r.check_known(j, {"step_index", "prompt_used", "job_id", "status", "artifact_uri", "error"},
                path);
  out.step_index = read_int(r, j, "step_index", path);
  out.prompt_used = r.string(j, "prompt_used", path);
  out.job_id = r.string(j, "job_id", path);
  out.status = read_enum<JobStatus>(r, j, "status", path, parse_job_status);
  out.artifact_uri = r.opt_string(j, "artifact_uri", path);
  out.error = r.opt_string(j, "error", path);
}

json to_value(const GoalPlan& g) {
  json j = {{"task_id", g.task_id},
            {"arm", std::string(to_string(g.arm))},
            {"video_plan", to_array(g.video_plan)}};
  j["text_plan"] = std::visit([](const auto& p) { return to_value(p); }, g.text_plan);
  return j;
}

void from_value(const json& j, const std::string& path, const Reader& r, GoalPlan& out) {
  r.object(j, path);
  r.check_known(j, {"task_id", "arm", "text_plan", "video_plan"}, path);
  out.task_id = r.string(j, "task_id", path);
  out.arm = read_enum<Arm>(r, j, "arm", path, parse_arm);
  const json& tp = r.member(j, "text_plan", path);
  const std::string tp_path = Reader::child(path, "text_plan");
  // The arm decides the plan shape.
  if (out.arm == Arm::VGTVP) {
    GroundedPlan plan;
    from_value(tp, tp_path, r, plan);
    out.text_plan = std::move(plan);
  } else {
    VanillaTextPlan plan;
    from_value(tp, tp_path, r, plan);
    out.text_plan = std::move(plan);
  }
  out.video_plan = from_array<VideoPlanItem>(r, j, "video_plan", path);
}

json to_value(const Judgment& jd) {
  return {{"subject_id", jd.subject_id},
          {"comparison_id", jd.comparison_id},
          {"aspect", std::string(to_string(jd.aspect))},
          {"verdict", std::string(to_string(jd.verdict))},
          {"submitted_at", jd.submitted_at}};
}

void from_value(const json& j, const std::string& path, const Reader& r, Judgment& out) {
  r.object(j, path);
  r.check_known(j, {"subject_id", "comparison_id", "aspect", "verdict", "submitted_at"}, path);
  out.subject_id = r.string(j, "subject_id", path);
  out.comparison_id = r.string(j, "comparison_id", path);
  out.aspect = read_enum<Aspect>(r, j, "aspect", path, parse_aspect);
  out.verdict = read_enum<Verdict>(r, j, "verdict", path, parse_verdict);
  out.submitted_at = r.string(j, "submitted_at", path);
}

}  // namespace mmplan::model
