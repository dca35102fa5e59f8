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

// Turns raw completions into plan values.
//
// Nothing here calls a model or retries; a failed parse is reported with the
// full raw text and the caller decides whether to re-prompt.
//
// List strategies are tried in a fixed order, NumberedList ("1.", "2)",
// "(3)") then StepPrefix ("Step 1:"), and the first one that yields a step
// wins. Markdown emphasis and heading hashes are removed before matching.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmplan/model/errors.hpp"
#include "mmplan/model/types.hpp"

namespace mmplan::parser {

enum class Strategy { NumberedList, StepPrefix, TaggedTriple, LabeledTriple };

std::string_view to_string(Strategy s);

struct ParseDiagnostics {
  Strategy strategy_used = Strategy::NumberedList;
  int dropped_lines = 0;
  std::vector<std::string> warnings;
};

class UnparsablePlan : public Error {
 public:
  UnparsablePlan(const std::string& message, std::string raw)
      : Error("UnparsablePlan", message), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// No complete triple, and at least one of text/context/visual never appeared.
class MissingField : public Error {
 public:
  MissingField(std::vector<std::string> fields, std::string raw);
  const std::vector<std::string>& fields() const noexcept { return fields_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::vector<std::string> fields_;
  std::string raw_;
};

struct VanillaParse {
  std::vector<model::VanillaStep> steps;
  ParseDiagnostics diagnostics;
};

struct GroundedParse {
  std::vector<model::GroundedStep> steps;
  ParseDiagnostics diagnostics;
};

struct FocParse {
  std::vector<model::FusedStep> steps;
  ParseDiagnostics diagnostics;
};

VanillaParse parse_vanilla(std::string_view raw);

// Accepts angle tags (<text> ... with or without closing tags) and labels
// ("Text: ... Context: ... Visual: ..."), in any field order. A triple
// missing a field is dropped with a warning.
GroundedParse parse_grounded(std::string_view raw);

// Citations of the form "(Video 2, 17-26s; Video 4, 3-9s)" are removed from
// the sentence and, when tracks are given, resolved to segment references.
// Tracks are matched by video_index (citation "Video v" is index v - 1).
FocParse parse_foc(std::string_view raw, std::span<const model::CaptionTrack> tracks = {});

std::string strip_markdown(std::string_view raw);

// First sentence or pre-colon heading, then the remainder. The remainder is
// empty when there is none.
std::pair<std::string, std::string> split_text_context(std::string_view item);

// "Text: ...\nContext: ...\nVisual: ..." blocks separated by blank lines.
std::string to_labeled_triples(std::span<const model::GroundedStep> steps);

// Whether a sentence opens with a person subject ("A person", "The chef",
// "Someone", "She", ...).
bool has_person_subject(std::string_view sentence);

}  // namespace mmplan::parser
