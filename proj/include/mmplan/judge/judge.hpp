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

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmplan/gateway/gateway.hpp"
#include "mmplan/model/errors.hpp"
#include "mmplan/model/types.hpp"
#include "mmplan/model/validate.hpp"
#include "mmplan/prompt/prompt_engine.hpp"

namespace mmplan::judge {

// Points are fixed-point hundredths so that totals add up exactly.
using Points = long long;

Points parse_points(std::string_view text);  // "23.5" -> 2350
std::string format_points(Points p);         // 2350 -> "23.5", 2200 -> "22"

class MissingCriterion : public Error {
 public:
  MissingCriterion(std::vector<std::string> ids, std::string raw);
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::vector<std::string> ids_;
  std::string raw_;
};

class ScoreOutOfRange : public Error {
 public:
  ScoreOutOfRange(std::string criterion, Points value, Points cap);
  const std::string& criterion() const noexcept { return criterion_; }
  Points value() const noexcept { return value_; }
  Points cap() const noexcept { return cap_; }

 private:
  std::string criterion_;
  Points value_;
  Points cap_;
};

struct Criterion {
  std::string id;
  std::string title;
  Points cap = 0;
  std::string question;
  // Optional finer split; caps add up to the criterion cap.
  std::vector<Criterion> components;
};

struct AspectRubric {
  std::string id;
  std::string title;
  Points cap = 0;
  std::vector<Criterion> criteria;
};

struct Rubric {
  std::vector<AspectRubric> aspects;

  static const Rubric& standard();
  std::size_t criterion_count() const;
  const Criterion* find(std::string_view id) const;
};

// Caps close: components sum to their criterion, criteria to their aspect,
// aspects to 100.
model::ValidationReport check(const Rubric& rubric);

struct AspectResult {
  std::string aspect_id;
  std::map<std::string, Points> criteria;
  Points total = 0;
  std::string feedback;
};

struct AspectScores {
  std::vector<AspectResult> aspects;  // rubric order
  std::map<std::string, Points> components;
  Points grand_total = 0;
  std::vector<std::string> warnings;
  model::Provenance provenance;

  const AspectResult* aspect(std::string_view id) const;
};

// Plan fields rendered for the judge: text, context and visual per step.
std::string plan_document(const model::TextPlan& plan);

prompt::RenderedPrompt build_judge_prompt(std::string_view plan_text, const model::TaskSpec& task,
                                          const Rubric& rubric = Rubric::standard());

AspectScores parse_judge_response(std::string_view raw, const Rubric& rubric = Rubric::standard());

inline constexpr std::string_view kRepeatInstruction = "Repeat the SCORE block exactly.";

struct JudgeConfig {
  std::string model_id;
  model::InferenceParams params;
};

AspectScores judge(const model::TextPlan& plan, const model::TaskSpec& task,
                   const JudgeConfig& config, gateway::Gateway& gateway,
                   const Rubric& rubric = Rubric::standard(),
                   const std::function<std::string()>& clock = {});

struct JudgedPlan {
  std::string task_id;
  model::Arm arm = model::Arm::VGTVP;
  AspectScores scores;
};

// "task_id,arm,aspect,score,total": one row per aspect; total is the grand total.
std::string to_csv(std::span<const JudgedPlan> judged);
// Writes "<dir>/<task_id>.<arm>.feedback.txt" and returns its path.
std::filesystem::path write_feedback(const std::filesystem::path& dir, const JudgedPlan& judged);

}  // namespace mmplan::judge
