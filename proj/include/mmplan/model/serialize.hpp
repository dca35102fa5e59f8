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

// Canonical persistence format: JSON, snake_case field names, top-level
// "schema_version": "1". Nested values carry no version.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mmplan/model/json_io.hpp"
#include "mmplan/model/types.hpp"

namespace mmplan::model {

using json = nlohmann::json;

// Bare value encoders (no envelope).
json to_value(const VideoRef& v);
json to_value(const TaskSpec& t);
json to_value(const InferenceParams& p);
json to_value(const Provenance& p);
json to_value(const VanillaStep& s);
json to_value(const VanillaTextPlan& p);
json to_value(const CaptionSegment& s);
json to_value(const CaptionTrack& t);
json to_value(const CaptionSet& s);
json to_value(const SegmentRef& s);
json to_value(const FusedStep& s);
json to_value(const TrackOrigin& o);
json to_value(const FusedCaption& f);
json to_value(const GroundedStep& s);
json to_value(const GroundedPlan& p);
json to_value(const VideoPlanItem& i);
json to_value(const GoalPlan& g);
json to_value(const Judgment& j);

// Bare value decoders.
void from_value(const json& j, const std::string& path, const json_io::Reader& r, VideoRef& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, TaskSpec& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                InferenceParams& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, Provenance& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, VanillaStep& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                VanillaTextPlan& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                CaptionSegment& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                CaptionTrack& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, CaptionSet& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, SegmentRef& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, FusedStep& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, TrackOrigin& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                FusedCaption& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                GroundedStep& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                GroundedPlan& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r,
                VideoPlanItem& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, GoalPlan& out);
void from_value(const json& j, const std::string& path, const json_io::Reader& r, Judgment& out);

template <class T>
json serialize(const T& value) {
  json doc = to_value(value);
  doc["schema_version"] = std::string(json_io::kSchemaVersion);
  return doc;
}

// Throws SchemaError at the first offending field. Unknown fields are
// accepted and reported through `warnings` when given.
template <class T>
T deserialize(const json& doc, std::vector<std::string>* warnings = nullptr) {
  json_io::check_schema_version(doc);
  json body = doc;
  body.erase("schema_version");
  json_io::Reader reader(warnings);
  T out{};
  from_value(body, "", reader, out);
  return out;
}

}  // namespace mmplan::model
