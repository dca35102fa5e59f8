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

#include "mmplan/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <mutex>
#include <set>
#include <thread>

#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"
#include "mmplan/model/validate.hpp"
#include "mmplan/parser/plan_parser.hpp"

namespace mmplan::pipeline {
namespace {

namespace fs = std::filesystem;
namespace json_io = model::json_io;
using json = nlohmann::json;
using model::Arm;
using model::TaskKind;
using model::TaskSpec;

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Vanilla, "vanilla"}, {Stage::Captions, "captions"}, {Stage::Foc, "foc"},
    {Stage::Aligned, "aligned"}, {Stage::Videos, "videos"},
};

constexpr std::pair<StageState::Kind, std::string_view> kKindNames[] = {
    {StageState::Kind::NotStarted, "not_started"},
    {StageState::Kind::Done, "done"},
    {StageState::Kind::Failed, "failed"},
};

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->category() + ": " + e.what();
  return std::string("InternalError: ") + e.what();
}

bool ends_with_punct(std::string_view s) {
  return !s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || s.back() == ':');
}

template <class T>
T read_artifact(const fs::path& path) {
  return model::deserialize<T>(json_io::parse_file(path));
}

template <class T>
void write_artifact(const fs::path& path, const T& value) {
  json_io::write_atomic(path, json_io::dump(model::serialize(value)));
}

// Fields that make two configs the same run; execution knobs may change on resume.
json identity_of(const RunConfig& c) {
  json j = to_json(c);
  for (auto key : {"concurrency_limit", "stop_after", "max_polls", "poll_interval_ms"}) {
    j.erase(key);
  }
  return j;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (auto [k, name] : kStageNames) {
    if (k == s) return name;
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto [k, name] : kStageNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::vector<Stage> stages_for(Arm arm) {
  if (arm == Arm::Baseline) return {Stage::Vanilla, Stage::Videos};
  return {Stage::Vanilla, Stage::Captions, Stage::Foc, Stage::Aligned, Stage::Videos};
}

model::ValidationReport validate(const RunConfig& c) {
  model::ValidationReport r;
  if (c.run_id.empty() || c.run_id == "." || c.run_id == ".." ||
      c.run_id.find_first_of("/\\") != std::string::npos) {
    r.add(model::code::kEmptyField, "/run_id", "run_id must be a nonempty single path component");
  }
  if (c.model_id.empty()) r.add(model::code::kEmptyField, "/model_id", "must be nonempty");
  if (c.concurrency_limit < 1) {
    r.add(model::code::kParamOutOfRange, "/concurrency_limit", "must be >= 1");
  }
  for (auto v : model::validate(c.params).violations) r.add(v.code, "/params" + v.path, v.message);
  if (c.task_ids.empty()) r.add(model::code::kEmptyField, "/task_ids", "no tasks selected");
  std::set<std::string> unique(c.task_ids.begin(), c.task_ids.end());
  if (unique.size() != c.task_ids.size()) {
    r.add(model::code::kDuplicateId, "/task_ids", "task ids repeat");
  }
  if (!prompt::is_alignment(c.alignment_template)) {
    r.add(model::code::kParamOutOfRange, "/alignment_template", "not an alignment template");
  }
  if (!(c.video_duration_sec > 0)) {
    r.add(model::code::kParamOutOfRange, "/video_duration_sec", "must be > 0");
  }
  if (c.max_polls < 1) r.add(model::code::kParamOutOfRange, "/max_polls", "must be >= 1");
  return r;
}

json to_json(const RunConfig& c) {
  json j;
  j["run_id"] = c.run_id;
  j["arm"] = std::string(model::to_string(c.arm));
  j["model_id"] = c.model_id;
  j["params"] = model::to_value(c.params);
  j["task_ids"] = c.task_ids;
  j["concurrency_limit"] = c.concurrency_limit;
  j["alignment_template"] = std::string(prompt::to_string(c.alignment_template));
  j["video_duration_sec"] = c.video_duration_sec;
  j["video_seed"] = c.video_seed;
  j["max_polls"] = c.max_polls;
  j["poll_interval_ms"] = c.poll_interval.count();
  if (c.stop_after) j["stop_after"] = std::string(to_string(*c.stop_after));
  return j;
}

RunConfig run_config_from_json(const json& doc) {
  json_io::Reader r;
  r.object(doc, "");
  RunConfig c;
  c.run_id = r.string(doc, "run_id", "");
  auto arm = model::parse_arm(r.string(doc, "arm", ""));
  if (!arm) throw SchemaError("/arm", "unknown arm");
  c.arm = *arm;
  c.model_id = r.string(doc, "model_id", "");
  model::from_value(r.member(doc, "params", ""), "/params", r, c.params);
  c.task_ids = r.strings(doc, "task_ids", "");
  c.concurrency_limit = static_cast<int>(r.integer(doc, "concurrency_limit", ""));
  auto kind = prompt::parse_template_kind(r.string(doc, "alignment_template", ""));
  if (!kind) throw SchemaError("/alignment_template", "unknown template kind");
  c.alignment_template = *kind;
  c.video_duration_sec = r.number(doc, "video_duration_sec", "");
  c.video_seed = static_cast<std::uint64_t>(r.integer(doc, "video_seed", ""));
  c.max_polls = static_cast<int>(r.integer(doc, "max_polls", ""));
  c.poll_interval = std::chrono::milliseconds(r.integer(doc, "poll_interval_ms", ""));
  if (auto s = r.opt_string(doc, "stop_after", "")) {
    c.stop_after = parse_stage(*s);
    if (!c.stop_after) throw SchemaError("/stop_after", "unknown stage " + *s);
  }
  return c;
}

bool RunState::all_done() const {
  for (const auto& [id, ledger] : tasks) {
    for (const auto& [stage, state] : ledger.stages) {
      if (state.kind != StageState::Kind::Done) return false;
    }
  }
  return true;
}

model::ValidationReport validate(const RunState& s) {
  model::ValidationReport r;
  const auto order = stages_for(s.arm);
  for (const auto& [id, ledger] : s.tasks) {
    bool prefix_done = true;
    for (auto stage : order) {
      auto it = ledger.stages.find(stage);
      const bool done = it != ledger.stages.end() && it->second.kind == StageState::Kind::Done;
      if (done && !prefix_done) {
        r.add("stage_order", "/tasks/" + id + "/" + std::string(to_string(stage)),
              "done before a prerequisite stage");
      }
      prefix_done = prefix_done && done;
    }
    for (const auto& [stage, state] : ledger.stages) {
      if (std::find(order.begin(), order.end(), stage) == order.end()) {
        r.add("stage_not_in_arm", "/tasks/" + id + "/" + std::string(to_string(stage)),
              "stage does not belong to the arm");
      }
    }
  }
  return r;
}

json to_json(const RunState& s) {
  json j;
  j["schema_version"] = std::string(json_io::kSchemaVersion);
  j["run_id"] = s.run_id;
  j["arm"] = std::string(model::to_string(s.arm));
  j["tasks"] = json::object();
  for (const auto& [id, ledger] : s.tasks) {
    json t = json::object();
    for (const auto& [stage, state] : ledger.stages) {
      json e;
      for (auto [k, name] : kKindNames) {
        if (k == state.kind) e["status"] = std::string(name);
      }
      if (state.kind == StageState::Kind::Done) e["ref"] = state.ref;
      if (state.kind == StageState::Kind::Failed) e["error"] = state.error;
      t[std::string(to_string(stage))] = e;
    }
    j["tasks"][id] = t;
  }
  return j;
}

RunState run_state_from_json(const json& doc) {
  json_io::check_schema_version(doc);
  json_io::Reader r;
  RunState s;
  s.run_id = r.string(doc, "run_id", "");
  auto arm = model::parse_arm(r.string(doc, "arm", ""));
  if (!arm) throw SchemaError("/arm", "unknown arm");
  s.arm = *arm;
  const json& tasks = r.member(doc, "tasks", "");
  r.object(tasks, "/tasks");
  for (auto it = tasks.begin(); it != tasks.end(); ++it) {
    const std::string tpath = json_io::Reader::child("/tasks", it.key());
    TaskLedger ledger;
    r.object(it.value(), tpath);
    for (auto st = it.value().begin(); st != it.value().end(); ++st) {
      const std::string spath = json_io::Reader::child(tpath, st.key());
      auto stage = parse_stage(st.key());
      if (!stage) throw SchemaError(spath, "unknown stage");
      StageState state;
      const std::string status = r.string(st.value(), "status", spath);
      bool known = false;
      for (auto [k, name] : kKindNames) {
        if (name == status) {
          state.kind = k;
          known = true;
        }
      }
      if (!known) throw SchemaError(spath + "/status", "unknown status " + status);
      if (state.kind == StageState::Kind::Done) state.ref = r.string(st.value(), "ref", spath);
      if (state.kind == StageState::Kind::Failed) {
        state.error = r.string(st.value(), "error", spath);
      }
      ledger.stages[*stage] = state;
    }
    s.tasks[it.key()] = std::move(ledger);
  }
  return s;
}

std::string system_clock_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string baseline_video_prompt(const model::VanillaStep& step) {
  if (step.context.empty()) return step.text;
  if (step.text.empty()) return step.context;
  return step.text + (ends_with_punct(step.text) ? " " : ". ") + step.context;
}

fs::path run_dir(const fs::path& workspace, const std::string& run_id) {
  return workspace / run_id;
}

fs::path artifact_path(const fs::path& workspace, const std::string& run_id,
                       const std::string& task_id, Stage stage) {
  return run_dir(workspace, run_id) / task_id / (std::string(to_string(stage)) + ".json");
}

Pipeline::Pipeline(gateway::Gateway& gateway, prompt::PromptEngine prompts, Clock clock)
    : gateway_(gateway),
      prompts_(std::move(prompts)),
      clock_(std::move(clock)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void Pipeline::set_sleep(std::function<void(std::chrono::milliseconds)> sleep) {
  sleep_ = std::move(sleep);
}

model::Provenance Pipeline::provenance_for(const gateway::ChatResponse& response,
                                           const prompt::RenderedPrompt& rendered,
                                           const RunConfig& config) const {
  model::Provenance p;
  p.backend_id = response.backend_id;
  p.model_id = config.model_id;
  p.params = config.params;
  p.prompt_digest = rendered.digest;
  p.template_version = rendered.template_version;
  p.created_at = clock_();
  return p;
}

template <class Parse>
auto Pipeline::complete_and_parse(const prompt::RenderedPrompt& rendered, const RunConfig& config,
                                  std::string_view reprompt, Parse&& parse)
    -> std::pair<decltype(parse(std::string_view{})), model::Provenance> {
  auto ask = [&](const prompt::RenderedPrompt& p) {
    gateway::ChatRequest req;
    req.model_id = config.model_id;
    req.system_prompt = config.params.system_prompt;
    req.user_prompt = p.text;
    req.params = config.params;
    req.template_version = p.template_version;
    return gateway_.chat(req);
  };
  auto first = ask(rendered);
  try {
    return {parse(first.text), provenance_for(first, rendered, config)};
  } catch (const parser::UnparsablePlan&) {
  } catch (const parser::MissingField&) {
  }
  auto retry_prompt = prompt::append_instruction(rendered, reprompt);
  auto second = ask(retry_prompt);
  return {parse(second.text), provenance_for(second, retry_prompt, config)};
}

model::VanillaTextPlan Pipeline::generate_vanilla_plan(const TaskSpec& task,
                                                       const RunConfig& config) {
  auto rendered = prompts_.render(prompt::TemplateKind::Vanilla, task);
  auto [parsed, prov] = complete_and_parse(rendered, config, kNumberedListInstruction,
                                           [](std::string_view raw) { return parser::parse_vanilla(raw); });
  model::VanillaTextPlan plan;
  plan.task_id = task.id;
  plan.steps = std::move(parsed.steps);
  plan.provenance = std::move(prov);
  return plan;
}

model::CaptionSet Pipeline::collect_captions(const TaskSpec& task,
                                             const dataset::Manifest& manifest,
                                             const RunConfig&) {
  std::vector<dataset::CaptionSource> sources;
  if (task.kind == TaskKind::Seen) {
    sources.push_back({task.id, task.video_refs});
  } else {
    sources = dataset::resolve_caption_sources(task, manifest);
  }
  model::CaptionSet set;
  set.task_id = task.id;
  int index = 0;
  for (const auto& source : sources) {
    set.source_task_ids.push_back(source.task_id);
    for (std::size_t k = 0; k < source.video_refs.size(); ++k, ++index) {
      gateway::CaptionRequest req;
      req.video_uri = source.video_refs[k].uri;
      req.video_index = index;
      try {
        set.tracks.push_back(gateway_.caption(req));
        set.origins.push_back({source.task_id, static_cast<int>(k)});
      } catch (const Error& e) {
        set.warnings.push_back("skipped " + source.task_id + " video " + std::to_string(k + 1) +
                               " (" + req.video_uri + "): " + e.what());
      }
    }
  }
  if (task.kind == TaskKind::Seen) set.source_task_ids.clear();
  if (set.tracks.empty()) throw NoCaptions(task.id);
  return set;
}

model::FusedCaption Pipeline::fuse_captions(const TaskSpec& task, const model::CaptionSet& captions,
                                            const RunConfig& config) {
  if (captions.tracks.empty()) throw NoCaptions(task.id);
  prompt::CaptionInput input = captions.tracks;
  auto rendered = prompts_.render(prompt::TemplateKind::Description, task, &input);
  std::span<const model::CaptionTrack> tracks(captions.tracks);
  auto [parsed, prov] =
      complete_and_parse(rendered, config, kNumberedListInstruction,
                         [&](std::string_view raw) { return parser::parse_foc(raw, tracks); });
  model::FusedCaption foc;
  foc.task_id = task.id;
  foc.steps = std::move(parsed.steps);
  foc.provenance = std::move(prov);
  foc.provenance.source_task_ids = captions.source_task_ids;
  return foc;
}

model::GroundedPlan Pipeline::align_plan(const TaskSpec& task, const model::VanillaTextPlan* vtp,
                                         const model::FusedCaption* foc, const RunConfig& config) {
  if (vtp == nullptr) throw PreconditionError("align_plan needs a vanilla text plan");
  if (foc == nullptr) throw PreconditionError("align_plan needs a fused caption");
  prompt::CaptionInput input = *foc;
  auto rendered = prompts_.render(config.alignment_template, task, &input, vtp);
  auto [parsed, prov] = complete_and_parse(rendered, config, kTripleInstruction,
                                           [](std::string_view raw) { return parser::parse_grounded(raw); });
  model::GroundedPlan plan;
  plan.task_id = task.id;
  plan.steps = std::move(parsed.steps);
  plan.provenance = std::move(prov);
  plan.provenance.source_task_ids = foc->provenance.source_task_ids;
  return plan;
}

std::vector<model::VideoPlanItem> Pipeline::generate_video_plan(const model::TextPlan& plan,
                                                                const RunConfig& config) {
  std::vector<std::pair<int, std::string>> prompts;
  if (const auto* g = std::get_if<model::GroundedPlan>(&plan)) {
    for (const auto& s : g->steps) prompts.emplace_back(s.index, s.visual);
  } else {
    for (const auto& s : std::get<model::VanillaTextPlan>(plan).steps) {
      prompts.emplace_back(s.index, baseline_video_prompt(s));
    }
  }
  if (prompts.empty()) throw PreconditionError("video plan needs at least one step");
  std::vector<model::VideoPlanItem> items;
  for (auto& [index, text] : prompts) {
    model::VideoPlanItem item;
    item.step_index = index;
    item.prompt_used = text;
    try {
      gateway::VideoJobRequest req;
      req.prompt = text;
      req.duration_sec = config.video_duration_sec;
      req.seed = config.video_seed;
      item.job_id = gateway_.submit_video(req);
      gateway::VideoJobStatus status;
      for (int poll = 0; poll < config.max_polls; ++poll) {
        if (poll > 0) sleep_(config.poll_interval);
        status = gateway_.poll_video(item.job_id);
        if (status.terminal()) break;
      }
      item.status = status.status;
      if (status.status == model::JobStatus::Done) item.artifact_uri = status.artifact_uri;
      item.error = status.error;
      if (!status.terminal()) item.error = "not finished after " + std::to_string(config.max_polls) + " polls";
    } catch (const Error& e) {
      item.status = model::JobStatus::Failed;
      item.error = describe(e);
    }
    items.push_back(std::move(item));
  }
  return items;
}

RunState Pipeline::run(const RunConfig& config, const dataset::Manifest& manifest,
                       const fs::path& workspace) {
  auto report = validate(config);
  if (!report.ok()) throw PreconditionError("invalid run config: " + report.summary());
  std::vector<const TaskSpec*> tasks;
  for (const auto& id : config.task_ids) {
    const TaskSpec* t = manifest.find(id);
    if (t == nullptr) throw PreconditionError("task " + id + " is not in the manifest");
    tasks.push_back(t);
  }

  const fs::path dir = run_dir(workspace, config.run_id);
  fs::create_directories(dir);
  const fs::path config_path = dir / "config.json";
  if (fs::exists(config_path)) {
    RunConfig previous = run_config_from_json(json_io::parse_file(config_path));
    if (identity_of(previous) != identity_of(config)) {
      throw PreconditionError("run " + config.run_id + " already exists with a different config");
    }
  }
  json_io::write_atomic(config_path, json_io::dump(to_json(config)));

  const fs::path ledger_path = dir / "ledger.json";
  RunState state;
  if (fs::exists(ledger_path)) {
    state = run_state_from_json(json_io::parse_file(ledger_path));
  } else {
    state.run_id = config.run_id;
    state.arm = config.arm;
  }
  const auto order = stages_for(config.arm);
  for (const auto* t : tasks) {
    auto& ledger = state.tasks[t->id];
    for (auto stage : order) ledger.stages.try_emplace(stage);
  }

  std::mutex mu;
  auto persist = [&] { json_io::write_atomic(ledger_path, json_io::dump(to_json(state))); };
  {
    std::lock_guard lock(mu);
    persist();
  }

  auto run_task = [&](const TaskSpec& task) {
    std::optional<model::VanillaTextPlan> vtp;
    std::optional<model::CaptionSet> captions;
    std::optional<model::FusedCaption> foc;
    std::optional<model::GroundedPlan> aligned;
    auto set_state = [&](Stage stage, StageState s, bool reset_later) {
      std::lock_guard lock(mu);
      auto& stages = state.tasks[task.id].stages;
      stages[stage] = std::move(s);
      if (reset_later) {
        for (auto it = stages.upper_bound(stage); it != stages.end(); ++it) it->second = {};
      }
      persist();
    };
    for (auto stage : order) {
      const fs::path path = artifact_path(workspace, config.run_id, task.id, stage);
      StageState current;
      {
        std::lock_guard lock(mu);
        current = state.tasks[task.id].stages[stage];
      }
      try {
        if (current.kind == StageState::Kind::Done && fs::exists(path)) {
          switch (stage) {
            case Stage::Vanilla:
              vtp = read_artifact<model::VanillaTextPlan>(path);
              break;
            case Stage::Captions:
              captions = read_artifact<model::CaptionSet>(path);
              break;
            case Stage::Foc:
              foc = read_artifact<model::FusedCaption>(path);
              break;
            case Stage::Aligned:
              aligned = read_artifact<model::GroundedPlan>(path);
              break;
            case Stage::Videos:
              break;
          }
        } else {
          fs::create_directories(path.parent_path());
          switch (stage) {
            case Stage::Vanilla:
              vtp = generate_vanilla_plan(task, config);
              write_artifact(path, *vtp);
              break;
            case Stage::Captions:
              captions = collect_captions(task, manifest, config);
              write_artifact(path, *captions);
              break;
            case Stage::Foc:
              foc = fuse_captions(task, *captions, config);
              write_artifact(path, *foc);
              break;
            case Stage::Aligned:
              aligned = align_plan(task, &*vtp, &*foc, config);
              write_artifact(path, *aligned);
              break;
            case Stage::Videos: {
              model::GoalPlan goal;
              goal.task_id = task.id;
              goal.arm = config.arm;
              if (config.arm == Arm::VGTVP) {
                goal.text_plan = *aligned;
              } else {
                goal.text_plan = *vtp;
              }
              goal.video_plan = generate_video_plan(goal.text_plan, config);
              write_artifact(path, goal);
              break;
            }
          }
          StageState done;
          done.kind = StageState::Kind::Done;
          done.ref = (fs::path(task.id) / path.filename()).generic_string();
          set_state(stage, done, true);
        }
      } catch (const std::exception& e) {
        StageState failed;
        failed.kind = StageState::Kind::Failed;
        failed.error = describe(e);
        set_state(stage, failed, true);
        return;
      }
      if (config.stop_after == stage) return;
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.concurrency_limit), tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(*tasks[i]);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::lock_guard lock(mu);
  return state;
}

}  // namespace mmplan::pipeline
