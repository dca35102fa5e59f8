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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmplan/dataset/dailypp.hpp"
#include "mmplan/gateway/gateway.hpp"
#include "mmplan/model/types.hpp"
#include "mmplan/prompt/prompt_engine.hpp"

namespace mmplan::pipeline {

class NoCaptions : public Error {
 public:
  explicit NoCaptions(const std::string& task_id)
      : Error("NoCaptions", "no caption track could be collected for " + task_id) {}
};

enum class Stage { Vanilla, Captions, Foc, Aligned, Videos };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);
// Stages an arm executes, in order.
std::vector<Stage> stages_for(model::Arm arm);

inline constexpr std::string_view kNumberedListInstruction = "Answer as a numbered list.";
inline constexpr std::string_view kTripleInstruction =
    "Answer with one block per step, written as <text> ... </text> <context> ... </context> "
    "<visual> ... </visual>.";

struct RunConfig {
  std::string run_id;
  model::Arm arm = model::Arm::VGTVP;
  std::string model_id;
  model::InferenceParams params;
  std::vector<std::string> task_ids;
  int concurrency_limit = 1;
  prompt::TemplateKind alignment_template = prompt::TemplateKind::Alignment;
  double video_duration_sec = 2.0;
  std::uint64_t video_seed = 0;
  int max_polls = 120;
  std::chrono::milliseconds poll_interval{2000};
  // Stops every task after this stage; later stages stay NotStarted.
  std::optional<Stage> stop_after;

  bool operator==(const RunConfig&) const = default;
};

model::ValidationReport validate(const RunConfig& c);
nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& doc);

struct StageState {
  enum class Kind { NotStarted, Done, Failed };
  Kind kind = Kind::NotStarted;
  std::string ref;    // artifact path relative to the run directory, when Done
  std::string error;  // "<category>: <message>", when Failed

  bool operator==(const StageState&) const = default;
};

struct TaskLedger {
  std::map<Stage, StageState> stages;  // only the arm's stages appear

  bool operator==(const TaskLedger&) const = default;
};

struct RunState {
  std::string run_id;
  model::Arm arm = model::Arm::VGTVP;
  std::map<std::string, TaskLedger> tasks;

  bool all_done() const;
  bool operator==(const RunState&) const = default;
};

// Monotonicity: Done only when every earlier stage of the arm is Done.
model::ValidationReport validate(const RunState& s);
nlohmann::json to_json(const RunState& s);
RunState run_state_from_json(const nlohmann::json& doc);

using Clock = std::function<std::string()>;
std::string system_clock_now();
inline std::string fixed_clock() { return "1970-01-01T00:00:00Z"; }

class Pipeline {
 public:
  explicit Pipeline(gateway::Gateway& gateway, prompt::PromptEngine prompts = {},
                    Clock clock = system_clock_now);

  void set_sleep(std::function<void(std::chrono::milliseconds)> sleep);

  model::VanillaTextPlan generate_vanilla_plan(const model::TaskSpec& task, const RunConfig& config);
  model::CaptionSet collect_captions(const model::TaskSpec& task, const dataset::Manifest& manifest,
                                     const RunConfig& config);
  model::FusedCaption fuse_captions(const model::TaskSpec& task, const model::CaptionSet& captions,
                                    const RunConfig& config);
  model::GroundedPlan align_plan(const model::TaskSpec& task, const model::VanillaTextPlan* vtp,
                                 const model::FusedCaption* foc, const RunConfig& config);
  std::vector<model::VideoPlanItem> generate_video_plan(const model::TextPlan& plan,
                                                        const RunConfig& config);

  // Runs (or resumes) config.run_id under workspace/{run_id}.
  RunState run(const RunConfig& config, const dataset::Manifest& manifest,
               const std::filesystem::path& workspace);

 private:
  template <class Parse>
  auto complete_and_parse(const prompt::RenderedPrompt& rendered, const RunConfig& config,
                          std::string_view reprompt, Parse&& parse)
      -> std::pair<decltype(parse(std::string_view{})), model::Provenance>;
  model::Provenance provenance_for(const gateway::ChatResponse& response,
                                   const prompt::RenderedPrompt& rendered,
                                   const RunConfig& config) const;

  gateway::Gateway& gateway_;
  prompt::PromptEngine prompts_;
  Clock clock_;
  std::function<void(std::chrono::milliseconds)> sleep_;
};

// Baseline video prompt: "{text}. {context}", without doubling punctuation.
std::string baseline_video_prompt(const model::VanillaStep& step);

std::filesystem::path run_dir(const std::filesystem::path& workspace, const std::string& run_id);
std::filesystem::path artifact_path(const std::filesystem::path& workspace,
                                    const std::string& run_id, const std::string& task_id,
                                    Stage stage);

}  // namespace mmplan::pipeline
