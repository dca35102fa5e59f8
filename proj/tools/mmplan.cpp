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

// Command-line entry point. Exit codes: 0 success, 1 operational error
// (JSON {"error", "message"} on stderr), 2 usage error.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmplan/dataset/dailypp.hpp"
#include "mmplan/gateway/config.hpp"
#include "mmplan/judge/judge.hpp"
#include "mmplan/metrics/metrics.hpp"
#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"
#include "mmplan/pipeline/pipeline.hpp"
#include "mmplan/survey/server.hpp"
#include "mmplan/survey/simulate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mmplan;
namespace json_io = model::json_io;

namespace {

struct Common {
  std::string manifest;
  std::string workspace = "workspace";
  std::string backend_config;
  std::string backend = "stub";
  std::uint64_t seed = 7;
  bool fixed_clock = false;
};

struct RunFlags {
  std::string run_id;
  std::string arm;
  std::string model;
  std::string tasks;
  std::string run_config;
  std::string templ;
  std::string captions_dir;
  int concurrency = 0;
  int top_k = 0;
  double temperature = -1;
  int poll_ms = -1;
  bool dry_run = false;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("UsageError", message) {}
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

dataset::Manifest load_manifest(const Common& c) {
  std::vector<std::string> warnings;
  dataset::Manifest m = c.manifest.empty() ? dataset::reference_manifest()
                                           : dataset::load_manifest(c.manifest, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return m;
}

std::unique_ptr<gateway::Gateway> make_gateway(const Common& c, const std::string& captions_dir = {}) {
  if (!c.backend_config.empty()) return gateway::load_gateway(c.backend_config);
  if (c.backend != "stub") throw UsageError("--backend must be \"stub\" without --backend-config");
  json cfg = gateway::stub_config(c.seed);
  cfg["cache_dir"] = fs::absolute(fs::path(c.workspace) / "cache").string();
  if (!captions_dir.empty()) cfg["captioner"]["sidecar_dir"] = fs::absolute(captions_dir).string();
  return gateway::build_gateway(cfg);
}

pipeline::Clock clock_for(const Common& c) {
  return c.fixed_clock ? pipeline::Clock(pipeline::fixed_clock) : pipeline::Clock(pipeline::system_clock_now);
}

prompt::TemplateKind parse_alignment_template(const std::string& s) {
  if (s == "paper-v1") return prompt::TemplateKind::Alignment;
  if (s == "variant-a") return prompt::TemplateKind::AlignmentVariantA;
  if (s == "variant-b") return prompt::TemplateKind::AlignmentVariantB;
  throw UsageError("--template must be paper-v1, variant-a or variant-b");
}

fs::path reports_dir(const Common& c, const std::string& run_id) {
  fs::path dir = fs::path(c.workspace) / "reports" / run_id;
  fs::create_directories(dir);
  return dir;
}

// Flags override a --run-config file, which overrides the stored config of an
// existing run, which overrides the built-in defaults.
pipeline::RunConfig resolve_run_config(const Common& c, const RunFlags& f) {
  if (f.run_id.empty()) throw UsageError("--run-id is required");
  pipeline::RunConfig rc;
  const fs::path stored = pipeline::run_dir(c.workspace, f.run_id) / "config.json";
  if (!f.run_config.empty()) {
    rc = pipeline::run_config_from_json(json_io::parse_file(f.run_config));
  } else if (fs::exists(stored)) {
    rc = pipeline::run_config_from_json(json_io::parse_file(stored));
  } else {
    rc.model_id = "stub-llm";
  }
  rc.run_id = f.run_id;
  if (!f.arm.empty()) {
    auto arm = model::parse_arm(f.arm);
    if (!arm) throw UsageError("--arm must be vgtvp or baseline");
    rc.arm = *arm;
  }
  if (!f.model.empty()) rc.model_id = f.model;
  if (!f.tasks.empty()) rc.task_ids = split_list(f.tasks);
  if (!f.templ.empty()) rc.alignment_template = parse_alignment_template(f.templ);
  if (f.concurrency > 0) rc.concurrency_limit = f.concurrency;
  if (f.top_k > 0) rc.params.top_k = f.top_k;
  if (f.temperature >= 0) rc.params.temperature = f.temperature;
  if (f.poll_ms >= 0) {
    rc.poll_interval = std::chrono::milliseconds(f.poll_ms);
  } else if (c.backend_config.empty()) {
    rc.poll_interval = std::chrono::milliseconds(0);
  }
  if (rc.task_ids.empty()) throw UsageError("--tasks is required for a new run");
  return rc;
}

json ledger_summary(const pipeline::RunState& state) {
  json tasks = json::object();
  for (const auto& [id, ledger] : state.tasks) {
    json stages = json::object();
    for (const auto& [stage, s] : ledger.stages) {
      std::string kind = s.kind == pipeline::StageState::Kind::Done     ? "done"
                         : s.kind == pipeline::StageState::Kind::Failed ? "failed"
                                                                        : "not_started";
      stages[std::string(pipeline::to_string(stage))] =
          s.error.empty() ? json(kind) : json{{"status", kind}, {"error", s.error}};
    }
    tasks[id] = std::move(stages);
  }
  return json{{"run_id", state.run_id}, {"arm", model::to_string(state.arm)}, {"tasks", tasks}};
}

int cmd_validate(const Common& c) {
  if (c.manifest.empty()) throw UsageError("--manifest is required");
  std::cout << load_manifest(c).counts().summary() << "\n";
  return 0;
}

int cmd_run(const Common& c, const RunFlags& f, std::optional<pipeline::Stage> stop_after) {
  pipeline::RunConfig rc = resolve_run_config(c, f);
  const auto order = pipeline::stages_for(rc.arm);
  if (stop_after && std::find(order.begin(), order.end(), *stop_after) == order.end()) {
    throw PreconditionError("stage " + std::string(pipeline::to_string(*stop_after)) +
                            " is not part of the " + std::string(model::to_string(rc.arm)) + " arm");
  }
  rc.stop_after = stop_after;
  auto report = pipeline::validate(rc);
  if (!report.ok()) throw SchemaError(report.violations.front().path, report.summary());

  const dataset::Manifest manifest = load_manifest(c);
  if (f.dry_run) {
    json plan{{"run_id", rc.run_id}, {"arm", model::to_string(rc.arm)}, {"tasks", rc.task_ids}};
    json stages = json::array();
    for (auto s : order) {
      stages.push_back(pipeline::to_string(s));
      if (stop_after == s) break;
    }
    plan["stages"] = stages;
    for (const auto& id : rc.task_ids) {
      if (manifest.find(id) == nullptr) throw PreconditionError("task " + id + " is not in the manifest");
    }
    std::cout << plan.dump(2) << "\n";
    return 0;
  }

  auto gw = make_gateway(c, f.captions_dir);
  pipeline::Pipeline p(*gw, prompt::PromptEngine{}, clock_for(c));
  pipeline::RunState state = p.run(rc, manifest, c.workspace);
  json summary = ledger_summary(state);
  const auto stats = gw->stats();
  summary["backend_calls"] = stats.backend_calls.size();
  summary["cache_hits"] = stats.cache_hits;
  std::cout << summary.dump(2) << "\n";

  for (const auto& [id, ledger] : state.tasks) {
    for (const auto& [stage, s] : ledger.stages) {
      if (s.kind == pipeline::StageState::Kind::Failed) {
        throw Error("StageFailed", id + "/" + std::string(pipeline::to_string(stage)) + ": " + s.error);
      }
    }
  }
  return 0;
}

// The latest text plan a run holds for a task.
std::optional<model::GoalPlan> load_goal(const Common& c, const std::string& run_id,
                                         const std::string& task_id, model::Arm arm) {
  auto path = [&](pipeline::Stage s) { return pipeline::artifact_path(c.workspace, run_id, task_id, s); };
  if (fs::exists(path(pipeline::Stage::Videos))) {
    return model::deserialize<model::GoalPlan>(json_io::parse_file(path(pipeline::Stage::Videos)));
  }
  model::GoalPlan g;
  g.task_id = task_id;
  g.arm = arm;
  if (fs::exists(path(pipeline::Stage::Aligned))) {
    g.text_plan = model::deserialize<model::GroundedPlan>(json_io::parse_file(path(pipeline::Stage::Aligned)));
    return g;
  }
  if (fs::exists(path(pipeline::Stage::Vanilla))) {
    g.text_plan = model::deserialize<model::VanillaTextPlan>(json_io::parse_file(path(pipeline::Stage::Vanilla)));
    return g;
  }
  return std::nullopt;
}

pipeline::RunConfig stored_config(const Common& c, const std::string& run_id) {
  if (run_id.empty()) throw UsageError("--run-id is required");
  const fs::path p = pipeline::run_dir(c.workspace, run_id) / "config.json";
  if (!fs::exists(p)) throw PreconditionError("run " + run_id + " does not exist in " + c.workspace);
  return pipeline::run_config_from_json(json_io::parse_file(p));
}

std::string plan_text(const model::TextPlan& plan) {
  std::string out;
  auto add = [&](const std::string& s) { out += (out.empty() ? "" : " ") + s; };
  if (auto* g = std::get_if<model::GroundedPlan>(&plan)) {
    for (const auto& s : g->steps) add(s.text);
  } else {
    for (const auto& s : std::get<model::VanillaTextPlan>(plan).steps) add(s.text);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  json_io::write_atomic(path, text);
  std::cerr << "wrote " << path.string() << "\n";
}

int cmd_eval_text(const Common& c, const std::string& run_id, const std::string& reference_run, int max_n) {
  if (reference_run.empty()) throw UsageError("--reference-run is required");
  const auto rc = stored_config(c, run_id);
  const auto ref_rc = stored_config(c, reference_run);
  metrics::BleuConfig bleu_cfg;
  bleu_cfg.max_n = max_n;
  std::vector<metrics::MetricRow> rows;
  double bleu_sum = 0, meteor_sum = 0;
  int n = 0;
  for (const auto& task : rc.task_ids) {
    auto cand = load_goal(c, run_id, task, rc.arm);
    auto ref = load_goal(c, reference_run, task, ref_rc.arm);
    if (!cand || !ref) {
      std::cerr << "warning: skipping " << task << " (plan missing in one run)\n";
      continue;
    }
    const auto ct = metrics::tokenize(plan_text(cand->text_plan));
    const std::vector<metrics::Tokens> rt{metrics::tokenize(plan_text(ref->text_plan))};
    const double b = metrics::bleu(ct, rt, bleu_cfg);
    const double m = ct.empty() || rt[0].empty() ? 0.0 : metrics::meteor(ct, rt[0]);
    rows.push_back({task, rc.arm, "bleu", b});
    rows.push_back({task, rc.arm, "meteor", m});
    bleu_sum += b, meteor_sum += m, ++n;
  }
  if (n == 0) throw PreconditionError("no task has plans in both runs");
  write_text(reports_dir(c, run_id) / ("text-metrics-vs-" + reference_run + ".csv"), metrics::to_csv(rows));
  std::cout << json{{"tasks", n}, {"bleu", bleu_sum / n}, {"meteor", meteor_sum / n}}.dump(2) << "\n";
  return 0;
}

int cmd_eval_mss(const Common& c, const std::string& run_id, int frame_rate, const std::string& sampling,
                 const std::string& frames) {
  const auto rc = stored_config(c, run_id);
  metrics::MssConfig cfg;
  cfg.frame_rate = frame_rate;
  if (sampling == "fps") {
    cfg.sampling = metrics::FrameSampling::Fps;
  } else if (sampling != "stride") {
    throw UsageError("--sampling must be stride or fps");
  }
  std::unique_ptr<metrics::FrameSource> source;
  if (frames == "listed") {
    source = std::make_unique<metrics::ListedFrameSource>();
  } else if (frames == "synthetic") {
    source = std::make_unique<metrics::SyntheticFrameSource>();
  } else {
    throw UsageError("--frames must be synthetic or listed");
  }
  auto gw = make_gateway(c);
  std::vector<metrics::MetricRow> rows;
  json out = json::object();
  std::vector<double> per_task;
  for (const auto& task : rc.task_ids) {
    auto goal = load_goal(c, run_id, task, rc.arm);
    if (!goal || goal->video_plan.empty()) {
      std::cerr << "warning: " << task << " has no video plan\n";
      continue;
    }
    std::vector<double> values;
    for (const auto& item : goal->video_plan) {
      if (!item.artifact_uri) continue;
      auto r = metrics::mss(*item.artifact_uri, item.prompt_used, cfg, *source, *gw);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      values.push_back(r.value);
    }
    if (values.empty()) continue;
    const double v = metrics::mean(values);
    rows.push_back({task, rc.arm, "mss@" + std::to_string(frame_rate), v});
    out[task] = metrics::format_report(v);
    per_task.push_back(v);
  }
  if (per_task.empty()) throw metrics::NoFrames("no finished video in run " + run_id);
  write_text(reports_dir(c, run_id) / ("mss-" + std::to_string(frame_rate) + ".csv"), metrics::to_csv(rows));
  std::cout << json{{"tasks", out}, {"mean", metrics::format_report(metrics::mean(per_task))}}.dump(2)
            << "\n";
  return 0;
}

int cmd_judge(const Common& c, const std::string& run_id, const std::string& judge_model) {
  const auto rc = stored_config(c, run_id);
  const dataset::Manifest manifest = load_manifest(c);
  auto gw = make_gateway(c);
  judge::JudgeConfig cfg{judge_model, model::InferenceParams{}};
  std::vector<judge::JudgedPlan> judged;
  const fs::path dir = reports_dir(c, run_id);
  json totals = json::object();
  for (const auto& task : rc.task_ids) {
    auto goal = load_goal(c, run_id, task, rc.arm);
    const model::TaskSpec* spec = manifest.find(task);
    if (!goal || spec == nullptr) {
      std::cerr << "warning: skipping " << task << "\n";
      continue;
    }
    judge::JudgedPlan jp{task, rc.arm,
                         judge::judge(goal->text_plan, *spec, cfg, *gw, judge::Rubric::standard(),
                                      clock_for(c))};
    judge::write_feedback(dir / "feedback", jp);
    totals[task] = judge::format_points(jp.scores.grand_total);
    judged.push_back(std::move(jp));
  }
  write_text(dir / ("judge-" + judge_model + ".csv"), judge::to_csv(judged));
  std::cout << json{{"grand_totals", totals}}.dump(2) << "\n";
  return 0;
}

int cmd_stats(const Common& c, const std::string& runs, const std::string& scope_s,
              const std::string& class_s, int top_k) {
  auto scope = dataset::parse_scope(scope_s);
  auto cls = dataset::parse_token_class(class_s);
  if (!scope) throw UsageError("--scope must be text, context, visual or all");
  if (!cls) throw UsageError("--token-class must be word or action_verb");
  std::vector<model::TextPlan> plans;
  for (const auto& run_id : split_list(runs)) {
    const auto rc = stored_config(c, run_id);
    for (const auto& task : rc.task_ids) {
      if (auto goal = load_goal(c, run_id, task, rc.arm)) plans.push_back(goal->text_plan);
    }
  }
  auto table = dataset::corpus_stats(plans, *scope, *cls, top_k, dataset::Lexicon::shipped());
  fs::path dir = fs::path(c.workspace) / "reports" / "stats";
  fs::create_directories(dir);
  const std::string csv = dataset::to_csv(table);
  write_text(dir / (std::string(dataset::to_string(*scope)) + "-" +
                    std::string(dataset::to_string(*cls)) + "-top" + std::to_string(top_k) + ".csv"),
             csv);
  std::cout << csv;
  return 0;
}

int cmd_export(const Common& c, const std::string& run_id) {
  const auto rc = stored_config(c, run_id);
  const fs::path dir = pipeline::run_dir(c.workspace, run_id);
  auto state = pipeline::run_state_from_json(json_io::parse_file(dir / "ledger.json"));
  json summary = ledger_summary(state);
  json plans = json::object();
  for (const auto& task : rc.task_ids) {
    auto goal = load_goal(c, run_id, task, rc.arm);
    if (!goal) continue;
    int videos = 0;
    for (const auto& item : goal->video_plan) videos += item.status == model::JobStatus::Done;
    plans[task] = {{"steps", goal->step_count()}, {"videos_done", videos}};
  }
  summary["plans"] = plans;
  json reports = json::array();
  const fs::path rdir = fs::path(c.workspace) / "reports" / run_id;
  if (fs::exists(rdir)) {
    for (const auto& e : fs::directory_iterator(rdir)) {
      if (e.is_regular_file()) reports.push_back(e.path().filename().string());
    }
  }
  std::sort(reports.begin(), reports.end());
  summary["reports"] = reports;
  summary["schema_version"] = std::string(json_io::kSchemaVersion);
  write_text(reports_dir(c, run_id) / "summary.json", json_io::dump(summary));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct SurveyFlags {
  bool serve = false;
  bool do_export = false;
  bool do_register = false;
  bool simulate = false;
  std::string host = "127.0.0.1";
  int port = 8787;
  std::string url;
  std::string add;
  std::string plans_root;
  std::string static_root;
  std::string pairing;
  std::string kind;
  std::uint64_t blinding_seed = 1;
  std::uint64_t verdict_seed = 7;
  int subjects = 10;
  int comparisons = 20;
  int tasks = 10;
};

survey::SurveyServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

json shares_json(const survey::Tallies& tallies) {
  json out = json::object();
  for (const auto& [pairing, aspects] : tallies) {
    for (const auto& [aspect, t] : aspects) {
      auto s = metrics::share(t);
      out[pairing][std::string(model::to_string(aspect))] = {
          {"win", t.win}, {"tie", t.tie}, {"lose", t.lose},
          {"win_pct", s.win.str()}, {"tie_pct", s.tie.str()}, {"lose_pct", s.lose.str()}};
    }
  }
  return out;
}

int cmd_survey(const Common& c, const SurveyFlags& f) {
  const int modes = f.serve + f.do_export + f.do_register + f.simulate + !f.add.empty();
  if (modes != 1) throw UsageError("survey needs exactly one of --serve, --register, --add, --export, --simulate");

  if (f.simulate) {
    survey::SimulationConfig cfg;
    cfg.subjects = f.subjects;
    cfg.comparisons = f.comparisons;
    cfg.tasks = f.tasks;
    cfg.blinding_seed = f.blinding_seed;
    cfg.verdict_seed = f.verdict_seed;
    cfg.dir = fs::path(c.workspace) / "survey-sim" / ("seed-" + std::to_string(f.blinding_seed));
    auto report = survey::simulate(cfg);
    std::cout << survey::to_json(report).dump(2) << "\n";
    if (!report.ok()) throw Error("SurveyConstraintViolation", "simulation broke a survey constraint");
    return 0;
  }

  survey::TallyFilter filter;
  if (!f.pairing.empty()) filter.pairing = f.pairing;
  if (!f.kind.empty()) {
    filter.kind = model::parse_task_kind(f.kind);
    if (!filter.kind) throw UsageError("--kind must be seen or unseen");
  }
  const std::string admin = survey::admin_token_from_env();

  if (f.serve) {
    if (admin.empty()) {
      std::cerr << "warning: " << survey::kAdminTokenEnv << " is unset; admin endpoints are disabled\n";
    }
    survey::SurveyStore store(fs::path(c.workspace) / "survey");
    survey::ServerOptions opts{admin, f.plans_root.empty() ? fs::path(c.workspace) : fs::path(f.plans_root),
                               f.static_root};
    survey::SurveyServer server(store, opts);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "serving on http://" << f.host << ":" << f.port << "\n";
    server.serve(f.host, f.port);
    g_server = nullptr;
    return 0;
  }

  if (f.url.empty()) {
    if (!f.do_export) throw UsageError("--url is required for --register and --add");
    survey::SurveyStore store(fs::path(c.workspace) / "survey");
    std::cout << shares_json(store.export_tallies(filter)).dump(2) << "\n";
    return 0;
  }
  survey::SurveyClient client(f.url);
  if (f.do_register) {
    auto reg = client.register_subject(admin);
    std::cout << json{{"subject_id", reg.subject_id}, {"token", reg.token}}.dump(2) << "\n";
  } else if (!f.add.empty()) {
    json doc = json_io::parse_file(f.add);
    std::vector<survey::Comparison> list;
    for (const auto& item : doc.at("comparisons")) list.push_back(survey::comparison_from_json(item));
    client.add_comparisons(admin, list);
    std::cout << json{{"added", list.size()}}.dump() << "\n";
  } else {
    std::cout << shares_json(client.export_tallies(admin, filter)).dump(2) << "\n";
  }
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--manifest", c.manifest, "Dataset manifest (defaults to the built-in reference)");
  app->add_option("--workspace", c.workspace, "Directory for all outputs")->capture_default_str();
  app->add_option("--backend-config", c.backend_config, "Backend configuration document");
  app->add_option("--backend", c.backend, "Backend set when no config is given")->capture_default_str();
  app->add_option("--seed", c.seed, "Stub backend seed")->capture_default_str();
  app->add_flag("--fixed-clock", c.fixed_clock, "Stamp artifacts with a constant time");
}

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--run-id", f.run_id, "Run identifier")->required();
  app->add_option("--arm", f.arm, "vgtvp or baseline");
  app->add_option("--model", f.model, "Chat model id");
  app->add_option("--tasks", f.tasks, "Comma-separated task ids");
  app->add_option("--run-config", f.run_config, "Run configuration document");
  app->add_option("--template", f.templ, "Alignment template: paper-v1, variant-a or variant-b");
  app->add_option("--captions-dir", f.captions_dir, "Caption sidecar directory for the stub captioner");
  app->add_option("--concurrency", f.concurrency, "Tasks processed in parallel");
  app->add_option("--top-k", f.top_k, "Sampling top_k");
  app->add_option("--temperature", f.temperature, "Sampling temperature");
  app->add_option("--poll-ms", f.poll_ms, "Video poll interval in milliseconds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal procedural planning toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  RunFlags run_flags;
  std::string run_id, reference_run, judge_model = "stub-judge", scope = "all",
                                     token_class = "word", sampling = "stride", frames = "synthetic";
  int frame_rate = 20, top_k = 30, max_n = 4;
  SurveyFlags survey_flags;

  auto* validate = app.add_subcommand("validate", "Check a dataset manifest");
  add_common(validate, common);

  const std::vector<std::pair<std::string, std::optional<pipeline::Stage>>> stage_verbs{
      {"plan", pipeline::Stage::Vanilla},   {"captions", pipeline::Stage::Captions},
      {"fuse", pipeline::Stage::Foc},       {"align", pipeline::Stage::Aligned},
      {"videos", pipeline::Stage::Videos},  {"run", std::nullopt}};
  std::map<std::string, CLI::App*> stage_cmds;
  for (const auto& [verb, stage] : stage_verbs) {
    auto* cmd = app.add_subcommand(verb, stage ? "Run the pipeline up to the " +
                                                     std::string(pipeline::to_string(*stage)) + " stage"
                                               : "Run every stage of the arm");
    add_common(cmd, common);
    add_run_flags(cmd, run_flags);
    stage_cmds[verb] = cmd;
  }
  stage_cmds["run"]->add_flag("--dry-run", run_flags.dry_run, "Print the stage plan only");

  auto* eval_text = app.add_subcommand("eval-text", "BLEU and METEOR between two runs");
  add_common(eval_text, common);
  eval_text->add_option("--run-id", run_id, "Candidate run")->required();
  eval_text->add_option("--reference-run", reference_run, "Reference run")->required();
  eval_text->add_option("--max-n", max_n, "BLEU order")->capture_default_str();

  auto* eval_mss = app.add_subcommand("eval-mss", "Mean similarity score of generated videos");
  add_common(eval_mss, common);
  eval_mss->add_option("--run-id", run_id, "Run")->required();
  eval_mss->add_option("--frame-rate", frame_rate, "Sampling rate")->capture_default_str();
  eval_mss->add_option("--sampling", sampling, "stride or fps")->capture_default_str();
  eval_mss->add_option("--frames", frames, "synthetic or listed")->capture_default_str();

  auto* judge_cmd = app.add_subcommand("judge", "Score plans with an LLM judge");
  add_common(judge_cmd, common);
  judge_cmd->add_option("--run-id", run_id, "Run")->required();
  judge_cmd->add_option("--judge-model", judge_model, "Judge model id")->capture_default_str();

  auto* survey_cmd = app.add_subcommand("survey", "Human preference survey service");
  add_common(survey_cmd, common);
  survey_cmd->add_flag("--serve", survey_flags.serve, "Serve the survey over HTTP");
  survey_cmd->add_flag("--register", survey_flags.do_register, "Register a subject");
  survey_cmd->add_option("--add", survey_flags.add, "Add comparisons from a document");
  survey_cmd->add_flag("--export", survey_flags.do_export, "Print de-blinded tallies");
  survey_cmd->add_flag("--simulate", survey_flags.simulate, "Run a scripted subject pool headlessly");
  survey_cmd->add_option("--host", survey_flags.host)->capture_default_str();
  survey_cmd->add_option("--port", survey_flags.port)->capture_default_str();
  survey_cmd->add_option("--url", survey_flags.url, "Service base URL for client actions");
  survey_cmd->add_option("--plans-root", survey_flags.plans_root, "Root for comparison plan refs");
  survey_cmd->add_option("--static-root", survey_flags.static_root, "UI assets served at /");
  survey_cmd->add_option("--pairing", survey_flags.pairing, "Export filter");
  survey_cmd->add_option("--kind", survey_flags.kind, "Export filter: seen or unseen");
  survey_cmd->add_option("--subjects", survey_flags.subjects)->capture_default_str();
  survey_cmd->add_option("--comparisons", survey_flags.comparisons)->capture_default_str();
  survey_cmd->add_option("--tasks", survey_flags.tasks)->capture_default_str();
  survey_cmd->add_option("--blinding-seed", survey_flags.blinding_seed)->capture_default_str();
  survey_cmd->add_option("--verdict-seed", survey_flags.verdict_seed)->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Token frequency tables over run plans");
  add_common(stats, common);
  stats->add_option("--run-id", run_id, "Comma-separated runs")->required();
  stats->add_option("--scope", scope, "text, context, visual or all")->capture_default_str();
  stats->add_option("--token-class", token_class, "word or action_verb")->capture_default_str();
  stats->add_option("--top-k", top_k, "Table size")->capture_default_str();

  auto* export_cmd = app.add_subcommand("export", "Write a run summary report");
  add_common(export_cmd, common);
  export_cmd->add_option("--run-id", run_id, "Run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(common);
    for (const auto& [verb, stage] : stage_verbs) {
      if (stage_cmds[verb]->parsed()) return cmd_run(common, run_flags, stage);
    }
    if (eval_text->parsed()) return cmd_eval_text(common, run_id, reference_run, max_n);
    if (eval_mss->parsed()) return cmd_eval_mss(common, run_id, frame_rate, sampling, frames);
    if (judge_cmd->parsed()) return cmd_judge(common, run_id, judge_model);
    if (survey_cmd->parsed()) return cmd_survey(common, survey_flags);
    if (stats->parsed()) return cmd_stats(common, run_id, scope, token_class, top_k);
    if (export_cmd->parsed()) return cmd_export(common, run_id);
  } catch (const UsageError& e) {
    std::cerr << json{{"error", e.category()}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.category()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}
