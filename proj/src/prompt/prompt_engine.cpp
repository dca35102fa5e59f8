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

#include "mmplan/prompt/prompt_engine.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "mmplan/model/digest.hpp"
#include "mmplan/model/json_io.hpp"

namespace mmplan::embedded {
std::string_view paper_templates_json();
}

namespace mmplan::prompt {
namespace {

using model::format_decimal;

constexpr std::array<std::pair<TemplateKind, std::string_view>, 5> kKindNames{{
    {TemplateKind::Vanilla, "vanilla"},
    {TemplateKind::Description, "description"},
    {TemplateKind::Alignment, "alignment"},
    {TemplateKind::AlignmentVariantA, "alignment_variant_a"},
    {TemplateKind::AlignmentVariantB, "alignment_variant_b"},
}};

constexpr std::array<std::string_view, 3> kPlaceholders{kTaskPlaceholder, kCaptionsPlaceholder,
                                                        kVtpPlaceholder};

}  // namespace

std::string_view to_string(TemplateKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<TemplateKind> parse_template_kind(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

bool is_alignment(TemplateKind kind) {
  return kind == TemplateKind::Alignment || kind == TemplateKind::AlignmentVariantA ||
         kind == TemplateKind::AlignmentVariantB;
}

std::vector<std::string_view> required_placeholders(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::Vanilla:
      return {kTaskPlaceholder};
    case TemplateKind::Description:
      return {kTaskPlaceholder, kCaptionsPlaceholder};
    default:
      return {kTaskPlaceholder, kCaptionsPlaceholder, kVtpPlaceholder};
  }
}

model::ValidationReport validate(const PromptTemplate& t) {
  model::ValidationReport r;
  for (auto ph : required_placeholders(t.kind)) {
    if (t.body.find(ph) == std::string::npos) {
      r.add("missing_placeholder", "/body", std::string(to_string(t.kind)) + " template lacks " +
                                                std::string(ph));
    }
  }
  if (t.version.empty()) r.add(model::code::kEmptyField, "/version", "must be nonempty");
  return r;
}

std::vector<PromptTemplate> parse_templates(const nlohmann::json& doc) {
  model::json_io::Reader reader;
  reader.object(doc, "");
  std::vector<PromptTemplate> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string path = model::json_io::Reader::child("", it.key());
    auto kind = parse_template_kind(it.key());
    if (!kind) throw UnknownKind(it.key());
    PromptTemplate t;
    t.kind = *kind;
    t.body = reader.string(it.value(), "body", path);
    t.version = reader.string(it.value(), "version", path);
    auto report = validate(t);
    if (!report.ok()) {
      throw SchemaError(path + report.violations.front().path, report.violations.front().message);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PromptTemplate> load_templates(const std::filesystem::path& path) {
  return parse_templates(model::json_io::parse_file(path));
}

std::vector<PromptTemplate> default_templates() {
  static const std::vector<PromptTemplate> kDefaults = parse_templates(
      model::json_io::parse_text(embedded::paper_templates_json(), "paper-v1.json"));
  return kDefaults;
}

std::string format_caption_tracks(std::span<const model::CaptionTrack> tracks) {
  std::ostringstream out;
  for (const auto& track : tracks) {
    for (const auto& seg : track.segments) {
      out << "Video " << (track.video_index + 1) << ", " << format_decimal(seg.start_sec) << "-"
          << format_decimal(seg.end_sec) << "s: " << seg.text << "\n";
    }
  }
  return out.str();
}

std::string format_fused_caption(const model::FusedCaption& foc) {
  std::ostringstream out;
  for (std::size_t i = 0; i < foc.steps.size(); ++i) {
    out << (i + 1) << ". " << foc.steps[i].sentence << "\n";
  }
  return out.str();
}

std::string format_vtp(const model::VanillaTextPlan& vtp) {
  std::ostringstream out;
  for (const auto& step : vtp.steps) {
    out << "Step " << step.index << ": " << step.text << " — " << step.context << "\n";
  }
  return out.str();
}

std::string format_captions(const CaptionInput& captions) {
  struct Visitor {
    std::string operator()(const model::FusedCaption& f) const { return format_fused_caption(f); }
    std::string operator()(const std::vector<model::CaptionTrack>& t) const {
      return format_caption_tracks(t);
    }
    std::string operator()(const std::string& raw) const { return raw; }
  };
  return std::visit(Visitor{}, captions);
}

std::string task_placeholder_value(const model::TaskSpec& task) {
  std::string title = task.title;
  while (!title.empty() && (title.back() == '?' || std::isspace(static_cast<unsigned char>(title.back())))) {
    title.pop_back();
  }
  return title;
}

RenderedPrompt make_rendered(std::string text, std::string template_version) {
  RenderedPrompt p;
  p.digest = model::sha256_hex(text);
  p.text = std::move(text);
  p.template_version = std::move(template_version);
  return p;
}

RenderedPrompt append_instruction(const RenderedPrompt& prompt, std::string_view instruction) {
  return make_rendered(prompt.text + "\n\n" + std::string(instruction), prompt.template_version);
}

PromptEngine::PromptEngine() {
  for (auto& t : default_templates()) templates_[t.kind] = t;
}

PromptEngine::PromptEngine(std::span<const PromptTemplate> overrides) : PromptEngine() {
  for (const auto& t : overrides) {
    auto report = validate(t);
    if (!report.ok()) throw SchemaError("/" + std::string(to_string(t.kind)), report.summary());
    templates_[t.kind] = t;
  }
}

const PromptTemplate& PromptEngine::get(TemplateKind kind) const {
  auto it = templates_.find(kind);
  if (it == templates_.end()) throw UnknownKind(std::string(to_string(kind)));
  return it->second;
}

RenderedPrompt PromptEngine::render(TemplateKind kind, const model::TaskSpec& task,
                                    const CaptionInput* captions,
                                    const model::VanillaTextPlan* vtp) const {
  const PromptTemplate& tmpl = get(kind);
  auto needs = required_placeholders(kind);
  auto required = [&](std::string_view ph) {
    return std::find(needs.begin(), needs.end(), ph) != needs.end();
  };
  if (required(kCaptionsPlaceholder) && captions == nullptr) {
    throw MissingInput(kind, kCaptionsPlaceholder);
  }
  if (required(kVtpPlaceholder) && vtp == nullptr) throw MissingInput(kind, kVtpPlaceholder);

  std::string captions_block;
  std::string vtp_block;
  if (captions != nullptr) captions_block = format_captions(*captions);
  if (vtp != nullptr) vtp_block = format_vtp(*vtp);
  // Blocks end with a newline; the template supplies its own spacing.
  auto trim_newline = [](std::string& s) {
    while (!s.empty() && s.back() == '\n') s.pop_back();
  };
  trim_newline(captions_block);
  trim_newline(vtp_block);

  const std::string task_value = task_placeholder_value(task);
  std::string text;
  text.reserve(tmpl.body.size() + captions_block.size() + vtp_block.size());
  const std::string& body = tmpl.body;
  for (std::size_t i = 0; i < body.size();) {
    bool substituted = false;
    if (body[i] == '{') {
      for (auto ph : kPlaceholders) {
        if (body.compare(i, ph.size(), ph) != 0) continue;
        if (ph == kTaskPlaceholder) {
          text += task_value;
        } else if (ph == kCaptionsPlaceholder) {
          if (captions == nullptr) throw MissingInput(kind, ph);
          text += captions_block;
        } else {
          if (vtp == nullptr) throw MissingInput(kind, ph);
          text += vtp_block;
        }
        i += ph.size();
        substituted = true;
        break;
      }
    }
    if (!substituted) text += body[i++];
  }
  return make_rendered(std::move(text), tmpl.version);
}

}  // namespace mmplan::prompt
