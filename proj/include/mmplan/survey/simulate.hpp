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

#include <json.hpp>

#include "mmplan/survey/store.hpp"

namespace mmplan::survey {

// Headless survey exercise: a pool of scripted subjects drives a live
// SurveyServer through SurveyClient and the outcome is checked against the
// verdicts they were told to give.
struct SimulationConfig {
  int subjects = 10;
  int comparisons = 20;
  int tasks = 10;  // comparisons cycle over this many tasks
  std::uint64_t blinding_seed = 1;
  std::uint64_t verdict_seed = 7;
  std::filesystem::path dir;  // store and generated plans live here
};

struct SimulationReport {
  int submissions = 0;
  int no_repeat_violations = 0;
  int duplicates_attempted = 0;
  int duplicates_rejected = 0;
  int min_judged = 0;  // per-comparison judgment counts after the run
  int max_judged = 0;
  Tallies expected;
  Tallies exported;
  double runtime_ms = 0;

  bool tallies_match() const;
  bool ok() const;
};

nlohmann::json to_json(const SimulationReport& r);
SimulationReport simulate(const SimulationConfig& config);

}  // namespace mmplan::survey
