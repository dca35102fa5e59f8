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

#include "mmplan/judge/judge.hpp"

#include <charconv>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "mmplan/model/json_io.hpp"

namespace mmplan::judge {
namespace {

Criterion leaf(std::string id, std::string title, Points cap, std::string question) {
  return {std::move(id), std::move(title), cap, std::move(question), {}};
}

Rubric make_standard() {
  Rubric r;
  r.aspects.push_back(
      {"textual_informativeness",
       "Textual informativeness",
       2500,
       {{"comprehensiveness", "Comprehensiveness", 1000,
         "Does the plan cover every step needed to finish the task, and add useful background?",
         {leaf("essential_steps", "Essential steps", 500, "Are all required steps present?"),
          leaf("additional_info", "Additional information", 500,
               "Does it add helpful tips or background?")}},
        {"clarity_precision", "Clarity and precision", 1000,
         "Is each step worded plainly and specifically?",
         {leaf("language_clarity", "Language clarity", 500, "Is the wording easy to follow?"),
          leaf("specificity", "Specificity", 500, "Are quantities, settings and objects named?")}},
        {"detail_level", "Level of detail", 500,
         "Are ingredients or tools specified and are steps broken down finely enough?",
         {leaf("ingredient_tool_specs", "Ingredient and tool specifications", 250,
               "Are the needed items listed precisely?"),
          leaf("step_breakdown", "Step breakdown", 250,
               "Are compound actions split into separate steps?")}}}});
  r.aspects.push_back(
      {"visual_informativeness",
       "Visual informativeness",
       2500,
       {leaf("visualization_cues", "Visualization cues", 1000,
             "Does the plan tell the reader what each step should look like?"),
        leaf("imagery_description", "Imagery description", 1000,
             "Are colors, shapes, textures or positions described?"),
        leaf("examples_analogies", "Examples and analogies", 500,
             "Are comparisons used to make states recognizable?")}});
  r.aspects.push_back(
      {"temporal_alignment",
       "Temporal alignment",
       2500,
       {leaf("chronological_order", "Chronological order", 1000,
             "Could the steps be performed in the order written?"),
        leaf("time_indications", "Time indications", 1000,
             "Are durations or waiting times given where they matter?"),
        leaf("simultaneous_actions", "Simultaneous actions", 500,
             "Are steps that overlap in time pointed out?")}});
  r.aspects.push_back(
      {"plan_accuracy",
       "Plan accuracy",
       2500,
       {leaf("correctness_of_steps", "Correctness of steps", 1500,
             "Would following the steps actually produce the intended result?"),
        leaf("consistency", "Consistency", 500,
             "Do the steps agree with each other on items and amounts?"),
        leaf("practicality_feasibility", "Practicality and feasibility", 500,
             "Can an ordinary person carry out the plan at home?")}});
  return r;
}

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Points parse_points(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw PreconditionError("not a number: " + std::string(text));
  }
  return static_cast<Points>(std::llround(v * 100));
}

std::string format_points(Points p) {
  std::string sign = p < 0 ? "-" : "";
  if (p < 0) p = -p;
  std::string out = sign + std::to_string(p / 100);
  Points frac = p % 100;
  if (frac != 0) {
    out += '.';
    out += static_cast<char>('0' + frac / 10);
    if (frac % 10 != 0) out += static_cast<char>('0' + frac % 10);
  }
  return out;
}

MissingCriterion::MissingCriterion(std::vector<std::string> ids, std::string raw)
    : Error("MissingCriterion",
            [&] {
              std::string m = "judge response lacks scores for:";
              for (const auto& id : ids) m += " " + id;
              return m;
            }()),
      ids_(std::move(ids)),
      raw_(std::move(raw)) {}

ScoreOutOfRange::ScoreOutOfRange(std::string criterion, Points value, Points cap)
    : Error("ScoreOutOfRange", criterion + " scored " + format_points(value) + ", cap is " +
                                   format_points(cap)),
      criterion_(std::move(criterion)),
      value_(value),
      cap_(cap) {}

const Rubric& Rubric::standard() {
  static const Rubric kRubric = [] {
    Rubric r = make_standard();
    auto report = check(r);
    if (!report.ok()) throw Error("RubricError", report.summary());
    return r;
  }();
  return kRubric;
}

std::size_t Rubric::criterion_count() const {
  std::size_t n = 0;
  for (const auto& a : aspects) n += a.criteria.size();
  return n;
}

const Criterion* Rubric::find(std::string_view id) const {
  for (const auto& a : aspects) {
    for (const auto& c : a.criteria) {
      if (c.id == id) return &c;
      for (const auto& comp : c.components) {
        if (comp.id == id) return &comp;
      }
    }
  }
  return nullptr;
}

model::ValidationReport check(const Rubric& rubric) {
  model::ValidationReport r;
  Points total = 0;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rubric.aspects.size(); ++i) {
    const auto& a = rubric.aspects[i];
    const std::string path = "/aspects/" + std::to_string(i);
    Points sum = 0;
    for (std::size_t k = 0; k < a.criteria.size(); ++k) {
      const auto& c = a.criteria[k];
      sum += c.cap;
      if (!ids.insert(c.id).second) r.add(model::code::kDuplicateId, path, "repeated id " + c.id);
      if (!c.components.empty()) {
        Points parts = 0;
        for (const auto& comp : c.components) {
          parts += comp.cap;
          if (!ids.insert(comp.id).second) {
            r.add(model::code::kDuplicateId, path, "repeated id " + comp.id);
          }
        }
        if (parts != c.cap) {
          r.add("cap_mismatch", path + "/criteria/" + std::to_string(k),
                c.id + " components add to " + format_points(parts));
        }
      }
    }
    if (sum != a.cap) r.add("cap_mismatch", path, a.id + " criteria add to " + format_points(sum));
    total += a.cap;
  }
  if (total != 10000) r.add("cap_mismatch", "/aspects", "aspects add to " + format_points(total));
  return r;
}

const AspectResult* AspectScores::aspect(std::string_view id) const {
  for (const auto& a : aspects) {
    if (a.aspect_id == id) return &a;
  }
  return nullptr;
}

std::string plan_document(const model::TextPlan& plan) {
  std::ostringstream out;
  if (const auto* g = std::get_if<model::GroundedPlan>(&plan)) {
    for (const auto& s : g->steps) {
      out << "Step " << s.index << ": " << s.text << "\n";
      if (!s.context.empty()) out << "Context: " << s.context << "\n";
      if (!s.visual.empty()) out << "Visual: " << s.visual << "\n";
    }
  } else {
    for (const auto& s : std::get<model::VanillaTextPlan>(plan).steps) {
      out << "Step " << s.index << ": " << s.text << "\n";
      if (!s.context.empty()) out << "Context: " << s.context << "\n";
    }
  }
  return out.str();
}

prompt::RenderedPrompt build_judge_prompt(std::string_view plan_text, const model::TaskSpec& task,
                                          const Rubric& rubric) {
  if (trim(plan_text).empty()) throw PreconditionError("judge prompt needs a nonempty plan");
  std::ostringstream out;
  out << "You are grading a step-by-step plan for the task \"" << prompt::task_placeholder_value(task)
      << "\". Reason through the following questions before scoring.\n"
      << "1. Identify the key points a correct plan for this task must cover.\n"
      << "2. Propose the cause and effect between consecutive steps: what does each step make "
         "possible next?\n"
      << "3. Present the plan in your own words and note any gaps, errors or ambiguities.\n"
      << "4. Answer each scoring question below.\n\n"
      << "Plan:\n"
      << trim(plan_text) << "\n\n"
      << "Scoring questions:\n";
  for (const auto& a : rubric.aspects) {
    out << "- " << a.title << " (" << format_points(a.cap) << " points)\n";
    for (const auto& c : a.criteria) {
      out << "  - " << c.id << " (" << format_points(c.cap) << "): " << c.question;
      if (!c.components.empty()) {
        out << " Split:";
        for (std::size_t i = 0; i < c.components.size(); ++i) {
          out << (i ? ";" : "") << " " << c.components[i].title << " "
              << format_points(c.components[i].cap);
        }
        out << ".";
      }
      out << "\n";
    }
  }
  out << "\nEnd your answer with this block, replacing each placeholder with a number between 0 "
         "and the stated maximum (half points allowed) and each feedback placeholder with one or "
         "two sentences:\n";
  for (const auto& a : rubric.aspects) {
    for (const auto& c : a.criteria) {
      out << "SCORE " << c.id << " = <score out of " << format_points(c.cap) << ">\n";
    }
  }
  for (const auto& a : rubric.aspects) {
    out << "FEEDBACK " << a.id << ": <feedback on " << a.title << ">\n";
  }
  std::string text = out.str();
  text.pop_back();
  return prompt::make_rendered(std::move(text), "judge-v1");
}

AspectScores parse_judge_response(std::string_view raw, const Rubric& rubric) {
  if (trim(raw).empty()) throw PreconditionError("judge response is empty");
  static const std::regex score_re(
      R"(^[\s*#>-]*SCORE\s+([A-Za-z_]+)\s*[=:]\s*\**\s*([0-9]+(?:\.[0-9]+)?)\s*(?:/\s*[0-9.]+)?\**\s*$)",
      std::regex::icase);
  static const std::regex feedback_re(R"(^[\s*#>-]*FEEDBACK\s+([A-Za-z_]+)\s*:\s*(.*)$)",
                                      std::regex::icase);
  AspectScores scores;
  std::map<std::string, Points> given;
  std::map<std::string, std::string> feedback;
  std::string* open_feedback = nullptr;

  std::istringstream in{std::string(raw)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, score_re)) {
      open_feedback = nullptr;
      std::string id = m[1].str();
      for (auto& ch : id) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (rubric.find(id) == nullptr) {
        scores.warnings.push_back("unknown criterion " + id);
        continue;
      }
      if (given.count(id)) {
        scores.warnings.push_back("repeated score for " + id + "; first kept");
        continue;
      }
      given[id] = parse_points(m[2].str());
    } else if (std::regex_match(line, m, feedback_re)) {
      std::string id = m[1].str();
      for (auto& ch : id) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      feedback[id] = trim(m[2].str());
      open_feedback = &feedback[id];
    } else if (open_feedback != nullptr && !trim(line).empty()) {
      *open_feedback += " " + trim(line);
    } else {
      open_feedback = nullptr;
    }
  }

  std::vector<std::string> missing;
  for (const auto& a : rubric.aspects) {
    AspectResult result;
    result.aspect_id = a.id;
    for (const auto& c : a.criteria) {
      bool all_parts = !c.components.empty();
      Points parts = 0;
      for (const auto& comp : c.components) {
        auto it = given.find(comp.id);
        if (it == given.end()) {
          all_parts = false;
          continue;
        }
        if (it->second < 0 || it->second > comp.cap) {
          throw ScoreOutOfRange(comp.id, it->second, comp.cap);
        }
        scores.components[comp.id] = it->second;
        parts += it->second;
      }
      auto it = given.find(c.id);
      Points value = 0;
      if (all_parts) {
        value = parts;
        if (it != given.end() && it->second != parts) {
          scores.warnings.push_back(c.id + " given as " + format_points(it->second) +
                                    ", components add to " + format_points(parts));
        }
      } else if (it != given.end()) {
        value = it->second;
      } else {
        missing.push_back(c.id);
        continue;
      }
      if (value < 0 || value > c.cap) throw ScoreOutOfRange(c.id, value, c.cap);
      result.criteria[c.id] = value;
      result.total += value;
    }
    if (auto f = feedback.find(a.id); f != feedback.end()) result.feedback = f->second;
    scores.grand_total += result.total;
    scores.aspects.push_back(std::move(result));
  }
  if (!missing.empty()) throw MissingCriterion(std::move(missing), std::string(raw));
  return scores;
}

AspectScores judge(const model::TextPlan& plan, const model::TaskSpec& task,
                   const JudgeConfig& config, gateway::Gateway& gateway, const Rubric& rubric,
                   const std::function<std::string()>& clock) {
  auto rendered = build_judge_prompt(plan_document(plan), task, rubric);
  auto ask = [&](const prompt::RenderedPrompt& p) {
    gateway::ChatRequest req;
    req.model_id = config.model_id;
    req.system_prompt = config.params.system_prompt;
    req.user_prompt = p.text;
    req.params = config.params;
    req.template_version = p.template_version;
    return gateway.chat(req);
  };
  auto finish = [&](AspectScores s, const gateway::ChatResponse& resp,
                    const prompt::RenderedPrompt& p) {
    s.provenance.backend_id = resp.backend_id;
    s.provenance.model_id = config.model_id;
    s.provenance.params = config.params;
    s.provenance.prompt_digest = p.digest;
    s.provenance.template_version = p.template_version;
    s.provenance.created_at = clock ? clock() : "1970-01-01T00:00:00Z";
    return s;
  };
  auto first = ask(rendered);
  try {
    return finish(parse_judge_response(first.text, rubric), first, rendered);
  } catch (const MissingCriterion&) {
  } catch (const ScoreOutOfRange&) {
  } catch (const PreconditionError&) {
  }
  auto retry = prompt::append_instruction(rendered, kRepeatInstruction);
  auto second = ask(retry);
  return finish(parse_judge_response(second.text, rubric), second, retry);
}

std::string to_csv(std::span<const JudgedPlan> judged) {
  std::string out = "task_id,arm,aspect,score,total\n";
  for (const auto& j : judged) {
    for (const auto& a : j.scores.aspects) {
      out += j.task_id + "," + std::string(model::to_string(j.arm)) + "," + a.aspect_id + "," +
             format_points(a.total) + "," + format_points(j.scores.grand_total) + "\n";
    }
  }
  return out;
}

std::filesystem::path write_feedback(const std::filesystem::path& dir, const JudgedPlan& judged) {
  std::filesystem::create_directories(dir);
  auto path = dir / (judged.task_id + "." + std::string(model::to_string(judged.arm)) +
                     ".feedback.txt");
  std::ostringstream out;
  out << "task: " << judged.task_id << "\narm: " << model::to_string(judged.arm)
      << "\ntotal: " << format_points(judged.scores.grand_total) << "\n";
  for (const auto& a : judged.scores.aspects) {
    out << "\n[" << a.aspect_id << "] " << format_points(a.total) << "\n";
    for (const auto& [id, v] : a.criteria) out << "  " << id << " = " << format_points(v) << "\n";
    if (!a.feedback.empty()) out << a.feedback << "\n";
  }
  model::json_io::write_atomic(path, out.str());
  return path;
}

}  // namespace mmplan::judge
