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

// File-based caption ingestion.
//
// A sidecar is UTF-8 text, one segment per line, "start_sec,end_sec,text".
// Only the first two commas delimit, so caption text may contain commas.
// Blank lines are skipped. The file for a video lives next to the others in a
// sidecar directory under "{stem}.captions.csv", where stem is the last path
// component of the video uri without its extension.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mmplan/model/types.hpp"

namespace mmplan::gateway {

std::string sidecar_filename(std::string_view video_uri);

// Segments come back sorted by start_sec (stable for equal starts).
model::CaptionTrack parse_sidecar(std::string_view text, int video_index,
                                  const std::string& origin = "<sidecar>");
model::CaptionTrack read_sidecar(const std::filesystem::path& path, int video_index);

std::string write_sidecar(const model::CaptionTrack& track);

}  // namespace mmplan::gateway
