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

#include "mmplan/model/types.hpp"

#include <array>
#include <utility>

namespace mmplan::model {
namespace {

template <class E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Domain, 5> kDomainNames{{
    {Domain::Breakfast, "Breakfast"},
    {Domain::Dinner, "Dinner"},
    {Domain::Drink, "Drink"},
    {Domain::HobbyCrafts, "Hobby&Crafts"},
    {Domain::HomeGarage, "Home&Garage"},
}};
constexpr NameTable<TaskKind, 2> kKindNames{{{TaskKind::Seen, "seen"}, {TaskKind::Unseen, "unseen"}}};
constexpr NameTable<JobStatus, 4> kStatusNames{{
    {JobStatus::Pending, "pending"},
    {JobStatus::Running, "running"},
    {JobStatus::Done, "done"},
    {JobStatus::Failed, "failed"},
}};
constexpr NameTable<Arm, 2> kArmNames{{{Arm::VGTVP, "vgtvp"}, {Arm::Baseline, "baseline"}}};
constexpr NameTable<Aspect, 4> kAspectNames{{
    {Aspect::TextualInformative, "textual_informative"},
    {Aspect::VisualInformative, "visual_informative"},
    {Aspect::TemporalCoherence, "temporal_coherence"},
    {Aspect::PlanAccuracy, "plan_accuracy"},
}};
constexpr NameTable<Verdict, 3> kVerdictNames{{
    {Verdict::WinA, "win_a"},
    {Verdict::Tie, "tie"},
    {Verdict::WinB, "win_b"},
}};

template <class E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "unknown";
}

template <class E, std::size_t N>
std::optional<E> value_of(const NameTable<E, N>& table, std::string_view s) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Domain d) { return name_of(kDomainNames, d); }
std::string_view to_string(TaskKind k) { return name_of(kKindNames, k); }
std::string_view to_string(JobStatus s) { return name_of(kStatusNames, s); }
std::string_view to_string(Arm a) { return name_of(kArmNames, a); }
std::string_view to_string(Aspect a) { return name_of(kAspectNames, a); }
std::string_view to_string(Verdict v) { return name_of(kVerdictNames, v); }

std::optional<Domain> parse_domain(std::string_view s) { return value_of(kDomainNames, s); }
std::optional<TaskKind> parse_task_kind(std::string_view s) { return value_of(kKindNames, s); }
std::optional<JobStatus> parse_job_status(std::string_view s) { return value_of(kStatusNames, s); }
std::optional<Arm> parse_arm(std::string_view s) { return value_of(kArmNames, s); }
std::optional<Aspect> parse_aspect(std::string_view s) { return value_of(kAspectNames, s); }
std::optional<Verdict> parse_verdict(std::string_view s) { return value_of(kVerdictNames, s); }

std::size_t GoalPlan::step_count() const {
  return std::visit([](const auto& plan) { return plan.steps.size(); }, text_plan);
}

}  // namespace mmplan::model
