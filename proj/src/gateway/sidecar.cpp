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

#include "mmplan/gateway/sidecar.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mmplan/gateway/errors.hpp"
#include "mmplan/model/digest.hpp"

namespace mmplan::gateway {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_seconds(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

std::string sidecar_filename(std::string_view video_uri) {
  auto slash = video_uri.find_last_of('/');
  std::string_view base = slash == std::string_view::npos ? video_uri : video_uri.substr(slash + 1);
  auto dot = base.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) base = base.substr(0, dot);
  return std::string(base) + ".captions.csv";
}

model::CaptionTrack parse_sidecar(std::string_view text, int video_index,
                                  const std::string& origin) {
  model::CaptionTrack track;
  track.video_index = video_index;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    auto c1 = line.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    model::CaptionSegment seg;
    seg.video_index = video_index;
    if (c2 == std::string_view::npos || !parse_seconds(line.substr(0, c1), seg.start_sec) ||
        !parse_seconds(line.substr(c1 + 1, c2 - c1 - 1), seg.end_sec)) {
      throw UnreadableSidecar(origin + ":" + std::to_string(line_no) +
                              ": expected start_sec,end_sec,text");
    }
    seg.text = std::string(trim(line.substr(c2 + 1)));
    if (seg.text.empty() || !(seg.start_sec >= 0 && seg.start_sec < seg.end_sec)) {
      throw UnreadableSidecar(origin + ":" + std::to_string(line_no) +
                              ": bad time range or empty text");
    }
    track.segments.push_back(std::move(seg));
  }
  std::stable_sort(track.segments.begin(), track.segments.end(),
                   [](const auto& a, const auto& b) { return a.start_sec < b.start_sec; });
  return track;
}

model::CaptionTrack read_sidecar(const std::filesystem::path& path, int video_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableSidecar("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sidecar(buf.str(), video_index, path.string());
}

std::string write_sidecar(const model::CaptionTrack& track) {
  std::string out;
  for (const auto& s : track.segments) {
    out += model::format_decimal(s.start_sec) + "," + model::format_decimal(s.end_sec) + "," +
           s.text + "\n";
  }
  return out;
}

}  // namespace mmplan::gateway
