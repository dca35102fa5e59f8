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

#include "mmplan/survey/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>

#include "mmplan/model/digest.hpp"
#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"
#include "mmplan/survey/server.hpp"

namespace mmplan::survey {
namespace {

using json = nlohmann::json;

constexpr std::string_view kMarkerA = "Grounded step";

void write_plan(const std::filesystem::path& path, const std::string& task, bool side_a, int steps) {
  model::GoalPlan g;
  g.task_id = task;
  if (side_a) {
    model::GroundedPlan tp;
    tp.task_id = task;
    for (int i = 1; i <= steps; ++i) {
      tp.steps.push_back({i, std::string(kMarkerA) + " " + std::to_string(i), "Context.", "Visual."});
    }
    g.text_plan = tp;
  } else {
    g.arm = model::Arm::Baseline;
    model::VanillaTextPlan vtp;
    vtp.task_id = task;
    for (int i = 1; i <= steps; ++i) vtp.steps.push_back({i, "Step " + std::to_string(i), "Context."});
    g.text_plan = vtp;
  }
  std::filesystem::create_directories(path.parent_path());
  model::json_io::write_atomic(path, model::serialize(g).dump());
}

model::Verdict scripted(std::uint64_t seed, int subject, const std::string& comparison,
                        model::Aspect aspect) {
  const auto h = model::sha256_u64(std::to_string(seed) + "|" + std::to_string(subject) + "|" +
                                   comparison + "|" + std::string(model::to_string(aspect)));
  static constexpr model::Verdict kVerdicts[] = {model::Verdict::WinA, model::Verdict::Tie,
                                                 model::Verdict::WinB};
  return kVerdicts[h % 3];
}

bool same(const Tallies& a, const Tallies& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [pairing, aspects] : a) {
    auto it = b.find(pairing);
    if (it == b.end() || it->second.size() != aspects.size()) return false;
    for (const auto& [aspect, t] : aspects) {
      auto jt = it->second.find(aspect);
      if (jt == it->second.end()) return false;
      if (t.win != jt->second.win || t.tie != jt->second.tie || t.lose != jt->second.lose) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

bool SimulationReport::tallies_match() const { return same(expected, exported); }

bool SimulationReport::ok() const {
  return no_repeat_violations == 0 && duplicates_rejected == duplicates_attempted &&
         tallies_match();
}

json to_json(const SimulationReport& r) {
  return json{{"submissions", r.submissions},
              {"no_repeat_violations", r.no_repeat_violations},
              {"duplicates_attempted", r.duplicates_attempted},
              {"duplicates_rejected", r.duplicates_rejected},
              {"min_judged", r.min_judged},
              {"max_judged", r.max_judged},
              {"expected", tallies_to_json(r.expected)},
              {"exported", tallies_to_json(r.exported)},
              {"tallies_match", r.tallies_match()},
              {"ok", r.ok()},
              {"runtime_ms", r.runtime_ms}};
}

SimulationReport simulate(const SimulationConfig& config) {
  if (config.dir.empty()) throw PreconditionError("simulation needs a directory");
  if (config.subjects < 1 || config.comparisons < 1 || config.tasks < 1) {
    throw PreconditionError("subjects, comparisons and tasks must be positive");
  }
  const auto started = std::chrono::steady_clock::now();
  std::filesystem::remove_all(config.dir);
  const auto plans = config.dir / "plans";

  std::vector<Comparison> comparisons;
  for (int i = 0; i < config.comparisons; ++i) {
    const int t = i % config.tasks;
    const int round = i / config.tasks;
    const std::string task = "task-" + std::to_string(t + 1);
    const std::string rival = round == 0 ? "baseline" : "rival-" + std::to_string(round);
    Comparison c;
    c.id = "cmp-" + std::to_string(i + 1);
    c.task_id = task;
    c.task_kind = t % 3 == 2 ? model::TaskKind::Unseen : model::TaskKind::Seen;
    c.pairing = "vgtvp-vs-" + rival;
    c.side_a = {"vgtvp", task + "/vgtvp.json"};
    c.side_b = {rival, task + "/" + rival + ".json"};
    write_plan(plans / c.side_a.plan_ref, task, true, 3);
    write_plan(plans / c.side_b.plan_ref, task, false, 2 + round);
    comparisons.push_back(std::move(c));
  }

  // Token only lives for this run; it is never written.
  const std::string admin = model::sha256_hex(config.dir.string() + std::to_string(config.verdict_seed));
  SurveyStore store(config.dir / "store", config.blinding_seed);
  SurveyServer server(store, ServerOptions{admin, plans, {}});
  const int port = server.start();
  SurveyClient client("http://127.0.0.1:" + std::to_string(port));
  client.add_comparisons(admin, comparisons);

  std::vector<Registration> pool;
  for (int s = 0; s < config.subjects; ++s) pool.push_back(client.register_subject(admin));

  SimulationReport report;
  std::vector<std::set<std::string>> judged_tasks(pool.size());
  std::vector<bool> active(pool.size(), true);
  std::map<std::string, std::string> task_of;
  std::map<std::string, std::string> pairing_of;
  for (const auto& c : comparisons) task_of[c.id] = c.task_id, pairing_of[c.id] = c.pairing;

  for (bool any = true; any;) {
    any = false;
    for (std::size_t s = 0; s < pool.size(); ++s) {
      if (!active[s]) continue;
      AssignmentView view;
      try {
        view = client.next_assignment(pool[s].token);
      } catch (const NoneAvailable&) {
        active[s] = false;
        continue;
      }
      any = true;
      const bool a_left = !view.left.steps.empty() &&
                          view.left.steps.front().text.rfind(kMarkerA, 0) == 0;
      std::map<model::Aspect, BlindVerdict> verdicts;
      for (auto aspect : model::kAllAspects) {
        const auto v = scripted(config.verdict_seed, static_cast<int>(s), view.comparison_id, aspect);
        BlindVerdict clicked = BlindVerdict::Tie;
        if (v != model::Verdict::Tie) {
          clicked = (v == model::Verdict::WinA) == a_left ? BlindVerdict::Left : BlindVerdict::Right;
        }
        verdicts[aspect] = clicked;
        auto& tally = report.expected[pairing_of.at(view.comparison_id)][aspect];
        tally.aspect = aspect;
        (v == model::Verdict::WinA ? tally.win : v == model::Verdict::Tie ? tally.tie : tally.lose)++;
      }
      client.submit(pool[s].token, view.comparison_id, verdicts);
      report.submissions++;
      if (!judged_tasks[s].insert(task_of.at(view.comparison_id)).second) {
        report.no_repeat_violations++;
      }
      if (judged_tasks[s].size() == 1) {
        report.duplicates_attempted++;
        try {
          client.submit(pool[s].token, view.comparison_id, verdicts);
        } catch (const DuplicateSubmission&) {
          report.duplicates_rejected++;
        }
      }
    }
  }

  // Audit the persisted judgments independently of what the subjects saw.
  std::map<std::string, std::map<std::string, int>> per_subject_task;
  for (const auto& j : store.judgments()) {
    if (j.aspect == model::Aspect::TextualInformative) {
      if (++per_subject_task[j.subject_id][task_of.at(j.comparison_id)] > 1) {
        report.no_repeat_violations++;
      }
    }
  }
  report.min_judged = std::numeric_limits<int>::max();
  for (const auto& c : comparisons) {
    const int n = store.judged_count(c.id);
    report.min_judged = std::min(report.min_judged, n);
    report.max_judged = std::max(report.max_judged, n);
  }
  report.exported = client.export_tallies(admin);
  server.stop();
  report.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                started)
                          .count();
  return report;
}

}  // namespace mmplan::survey
