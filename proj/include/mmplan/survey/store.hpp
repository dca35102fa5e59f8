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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmplan/metrics/metrics.hpp"
#include "mmplan/model/errors.hpp"
#include "mmplan/model/types.hpp"

namespace mmplan::survey {

class NoneAvailable : public Error {
 public:
  explicit NoneAvailable(const std::string& message) : Error("NoneAvailable", message) {}
};

class DuplicateSubmission : public Error {
 public:
  explicit DuplicateSubmission(const std::string& message)
      : Error("DuplicateSubmission", message) {}
};

class IncompleteAspects : public Error {
 public:
  explicit IncompleteAspects(const std::string& message) : Error("IncompleteAspects", message) {}
};

class UnknownAssignment : public Error {
 public:
  explicit UnknownAssignment(const std::string& message) : Error("UnknownAssignment", message) {}
};

class UnknownSubject : public Error {
 public:
  explicit UnknownSubject(const std::string& message) : Error("UnknownSubject", message) {}
};

struct PlanSide {
  std::string label;     // arm or model, never shown to subjects
  std::string plan_ref;  // GoalPlan document, relative to the plan root

  bool operator==(const PlanSide&) const = default;
};

struct Comparison {
  std::string id;
  std::string task_id;
  model::TaskKind task_kind = model::TaskKind::Seen;
  std::string pairing;  // e.g. "vgtvp-vs-baseline"
  PlanSide side_a;      // canonical A: WinA verdicts count for this side
  PlanSide side_b;

  bool operator==(const Comparison&) const = default;
};

nlohmann::json to_json(const Comparison& c);
Comparison comparison_from_json(const nlohmann::json& doc);

// Which canonical side is shown on the left.
enum class Side { Left, Right };
enum class BlindVerdict { Left, Tie, Right };

std::string_view to_string(BlindVerdict v);
std::optional<BlindVerdict> parse_blind_verdict(std::string_view s);

struct Assignment {
  Comparison comparison;
  bool a_on_left = true;
};

// Deterministic per (seed, subject, comparison).
bool a_on_left(std::uint64_t seed, std::string_view subject, std::string_view comparison);
model::Verdict deblind(BlindVerdict v, bool a_left);

struct Registration {
  std::string subject_id;
  std::string token;  // returned once; only its digest is stored
};

struct TallyFilter {
  std::optional<std::string> pairing;
  std::optional<model::TaskKind> kind;
};

using Tallies = std::map<std::string, std::map<model::Aspect, metrics::PreferenceTally>>;

// Append-only event log ("events.jsonl") replayed on open, plus a derived
// "snapshot.json" rewritten after every change. An empty path keeps
// everything in memory.
class SurveyStore {
 public:
  explicit SurveyStore(std::filesystem::path dir = {}, std::uint64_t blinding_seed = 0,
                       std::function<std::string()> clock = {});

  Registration register_subject();
  void add_comparison(const Comparison& c);
  std::vector<Comparison> comparisons() const;
  std::optional<std::string> authenticate(std::string_view token) const;

  Assignment next_assignment(const std::string& subject_id);
  void submit(const std::string& subject_id, const std::string& comparison_id,
              const std::map<model::Aspect, BlindVerdict>& verdicts);

  std::vector<model::Judgment> judgments() const;
  std::set<std::string> seen_tasks(const std::string& subject_id) const;
  int judged_count(const std::string& comparison_id) const;
  Tallies export_tallies(const TallyFilter& filter = {}) const;
  nlohmann::json snapshot() const;

 private:
  nlohmann::json snapshot_locked() const;
  struct SubjectState {
    std::string token_digest;
    std::set<std::string> seen_tasks;
    std::set<std::string> issued;
    std::set<std::string> submitted;
  };

  void apply(const nlohmann::json& event);
  void append(const nlohmann::json& event);
  std::mutex& subject_mutex(const std::string& subject_id);

  std::filesystem::path dir_;
  std::uint64_t seed_;
  std::function<std::string()> clock_;

  mutable std::mutex mu_;
  std::map<std::string, SubjectState> subjects_;
  std::map<std::string, Comparison> comparisons_;
  std::map<std::string, int> judged_;
  std::vector<model::Judgment> judgments_;

  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> subject_locks_;
};

}  // namespace mmplan::survey
