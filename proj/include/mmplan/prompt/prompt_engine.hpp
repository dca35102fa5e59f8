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

// Prompt templates and their deterministic rendering.
//
// Templates are data: the built-in set is compiled in from
// data/templates/paper-v1.json and an override file with the same shape
// (kind -> {body, version}) can replace any subset of kinds. Rendering is
// plain placeholder substitution in a single pass; substituted content is
// never rescanned, so captions that happen to contain "{VTP}" are inert.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mmplan/model/errors.hpp"
#include "mmplan/model/types.hpp"
#include "mmplan/model/validate.hpp"

namespace mmplan::prompt {

enum class TemplateKind { Vanilla, Description, Alignment, AlignmentVariantA, AlignmentVariantB };

std::string_view to_string(TemplateKind kind);
std::optional<TemplateKind> parse_template_kind(std::string_view s);
bool is_alignment(TemplateKind kind);

inline constexpr std::string_view kTaskPlaceholder = "{TASK}";
inline constexpr std::string_view kCaptionsPlaceholder = "{CAPTIONS}";
inline constexpr std::string_view kVtpPlaceholder = "{VTP}";

struct PromptTemplate {
  TemplateKind kind = TemplateKind::Vanilla;
  std::string body;
  std::string version;

  bool operator==(const PromptTemplate&) const = default;
};

struct RenderedPrompt {
  std::string template_version;
  std::string text;
  std::string digest;  // sha256_hex(text)

  bool operator==(const RenderedPrompt&) const = default;
};

class MissingInput : public Error {
 public:
  MissingInput(TemplateKind kind, std::string_view placeholder)
      : Error("MissingInput", std::string(to_string(kind)) + " prompt requires " +
                                  std::string(placeholder)),
        kind_(kind),
        placeholder_(placeholder) {}

  TemplateKind kind() const { return kind_; }
  const std::string& placeholder() const { return placeholder_; }

 private:
  TemplateKind kind_;
  std::string placeholder_;
};

class UnknownKind : public Error {
 public:
  explicit UnknownKind(const std::string& kind) : Error("UnknownKind", "unknown template kind " + kind) {}
};

// Caption evidence for Description/Alignment prompts: a fused caption, the
// raw per-video tracks, or an already serialized block.
using CaptionInput = std::variant<model::FusedCaption, std::vector<model::CaptionTrack>, std::string>;

std::vector<std::string_view> required_placeholders(TemplateKind kind);
model::ValidationReport validate(const PromptTemplate& t);

// The five built-in templates, version "paper-v1".
std::vector<PromptTemplate> default_templates();

// Parses an override document. Every entry is validated against its kind's
// placeholder requirements; a bad entry throws SchemaError.
std::vector<PromptTemplate> parse_templates(const nlohmann::json& doc);
std::vector<PromptTemplate> load_templates(const std::filesystem::path& path);

// "Video {v}, {start}-{end}s: {text}" per segment, tracks in order. {v} is
// 1-based (video_index + 1).
std::string format_caption_tracks(std::span<const model::CaptionTrack> tracks);
// "{i}. {sentence}" per fused step.
std::string format_fused_caption(const model::FusedCaption& foc);
// "Step {i}: {text} — {context}" per step.
std::string format_vtp(const model::VanillaTextPlan& vtp);
std::string format_captions(const CaptionInput& captions);

// The task title as substituted for {TASK}: trailing question marks and
// whitespace removed, since the templates supply their own punctuation.
std::string task_placeholder_value(const model::TaskSpec& task);

RenderedPrompt make_rendered(std::string text, std::string template_version);
// Appends a follow-up instruction on a new paragraph (re-prompting).
RenderedPrompt append_instruction(const RenderedPrompt& prompt, std::string_view instruction);

class PromptEngine {
 public:
  PromptEngine();
  // Templates given here replace the defaults kind by kind.
  explicit PromptEngine(std::span<const PromptTemplate> overrides);

  const PromptTemplate& get(TemplateKind kind) const;

  RenderedPrompt render(TemplateKind kind, const model::TaskSpec& task,
                        const CaptionInput* captions = nullptr,
                        const model::VanillaTextPlan* vtp = nullptr) const;

 private:
  std::map<TemplateKind, PromptTemplate> templates_;
};

}  // namespace mmplan::prompt
