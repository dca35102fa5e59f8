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

#include <gtest/gtest.h>

#include <fstream>
#include <regex>

#include "mmplan/gateway/backends.hpp"
#include "mmplan/gateway/errors.hpp"
#include "mmplan/gateway/synthetic_chat.hpp"
#include "mmplan/judge/judge.hpp"

namespace {

using namespace mmplan;
using namespace mmplan::judge;

model::TaskSpec pancakes() {
  model::TaskSpec t;
  t.id = "pancakes";
  t.title = "How to Make Pancakes?";
  return t;
}

model::GroundedPlan plan() {
  model::GroundedPlan p;
  p.task_id = "pancakes";
  p.steps = {{1, "Mix the batter", "Whisk flour, milk and eggs.", "A bowl of smooth pale batter."},
             {2, "Cook", "Pour onto a hot pan for 2 minutes.", "Golden pancakes in a pan."}};
  return p;
}

// Aspect totals 23.6, 22.7, 22.0 and 23.0.
const char* kFixtureBlock =
    "Key points: batter, heat, flipping.\n"
    "SCORE comprehensiveness = 9.6\n"
    "SCORE clarity_precision = 9\n"
    "SCORE detail_level = 5\n"
    "SCORE visualization_cues = 9.2\n"
    "SCORE imagery_description = 9\n"
    "SCORE examples_analogies = 4.5\n"
    "SCORE chronological_order = 9\n"
    "SCORE time_indications = 9\n"
    "SCORE simultaneous_actions = 4\n"
    "SCORE correctness_of_steps = 14\n"
    "SCORE consistency = 4.5\n"
    "SCORE practicality_feasibility = 4.5\n"
    "FEEDBACK textual_informativeness: Thorough,\n"
    "with clear amounts.\n"
    "FEEDBACK plan_accuracy: Sound.\n";

TEST(Rubric, CapsCloseAtOneHundred) {
  const Rubric& r = Rubric::standard();
  EXPECT_TRUE(check(r).ok());
  EXPECT_EQ(r.criterion_count(), 12u);
  Points total = 0;
  for (const auto& a : r.aspects) {
    EXPECT_EQ(a.cap, 2500);
    total += a.cap;
  }
  EXPECT_EQ(total, 10000);
  EXPECT_EQ(r.find("essential_steps")->cap, 500);
  EXPECT_EQ(r.find("ingredient_tool_specs")->cap, 250);
}

TEST(Rubric, BrokenCapsReported) {
  Rubric r = Rubric::standard();
  r.aspects[0].criteria[0].cap = 900;
  auto report = check(r);
  EXPECT_TRUE(report.has("cap_mismatch"));
}

TEST(Points, ParseAndFormat) {
  EXPECT_EQ(parse_points("23.5"), 2350);
  EXPECT_EQ(parse_points("2.25"), 225);
  EXPECT_EQ(format_points(2350), "23.5");
  EXPECT_EQ(format_points(2200), "22");
  EXPECT_EQ(format_points(9130), "91.3");
  EXPECT_EQ(format_points(225), "2.25");
}

TEST(Prompt, TwelveScorePlaceholdersAndDeterministic) {
  auto p = build_judge_prompt(plan_document(plan()), pancakes());
  std::regex placeholder(R"((^|\n)SCORE [a-z_]+ = <score out of [0-9.]+>)");
  auto n = std::distance(std::sregex_iterator(p.text.begin(), p.text.end(), placeholder),
                         std::sregex_iterator());
  EXPECT_EQ(n, 12);
  EXPECT_NE(p.text.find("Make Pancakes"), std::string::npos);
  EXPECT_NE(p.text.find("Visual: A bowl of smooth pale batter."), std::string::npos);
  EXPECT_EQ(build_judge_prompt(plan_document(plan()), pancakes()), p);
}

TEST(Prompt, EmptyPlanIsPrecondition) {
  EXPECT_THROW(build_judge_prompt("  \n", pancakes()), PreconditionError);
}

TEST(Parse, CompleteBlockTotals) {
  auto s = parse_judge_response(kFixtureBlock);
  ASSERT_EQ(s.aspects.size(), 4u);
  EXPECT_EQ(s.aspect("textual_informativeness")->total, 2360);
  EXPECT_EQ(s.aspect("visual_informativeness")->total, 2270);
  EXPECT_EQ(s.aspect("temporal_alignment")->total, 2200);
  EXPECT_EQ(s.aspect("plan_accuracy")->total, 2300);
  EXPECT_EQ(s.grand_total, 9130);
  EXPECT_EQ(format_points(s.grand_total), "91.3");
  EXPECT_EQ(s.aspect("textual_informativeness")->feedback, "Thorough, with clear amounts.");
}

TEST(Parse, ComponentOverCapIsOutOfRange) {
  std::string raw = std::string(kFixtureBlock) + "SCORE essential_steps = 7\n";
  try {
    parse_judge_response(raw);
    FAIL();
  } catch (const ScoreOutOfRange& e) {
    EXPECT_EQ(e.criterion(), "essential_steps");
    EXPECT_EQ(e.value(), 700);
    EXPECT_EQ(e.cap(), 500);
  }
}

TEST(Parse, CriterionOverCapIsOutOfRange) {
  std::string raw = std::regex_replace(std::string(kFixtureBlock), std::regex("consistency = 4.5"),
                                       "consistency = 5.5");
  EXPECT_THROW(parse_judge_response(raw), ScoreOutOfRange);
}

TEST(Parse, MissingCriteriaListed) {
  std::string raw = std::regex_replace(std::string(kFixtureBlock),
                                       std::regex("SCORE (consistency|detail_level) = [0-9.]+\n"), "");
  try {
    parse_judge_response(raw);
    FAIL();
  } catch (const MissingCriterion& e) {
    EXPECT_EQ(e.ids(), (std::vector<std::string>{"detail_level", "consistency"}));
    EXPECT_EQ(e.raw(), raw);
  }
}

TEST(Parse, ComponentsReplaceCriterionScore) {
  std::string raw = std::regex_replace(std::string(kFixtureBlock),
                                       std::regex("SCORE comprehensiveness = 9.6\n"), "");
  raw += "SCORE essential_steps = 4.5\nSCORE additional_info = 3.5\n";
  auto s = parse_judge_response(raw);
  EXPECT_EQ(s.aspect("textual_informativeness")->criteria.at("comprehensiveness"), 800);
  EXPECT_EQ(s.grand_total, 9130 - 160);
}

TEST(Parse, TolerantFormatting) {
  std::string raw = std::regex_replace(std::string(kFixtureBlock), std::regex("SCORE (\\w+) = ([0-9.]+)"),
                                       "**Score $1: $2/10**");
  auto s = parse_judge_response(raw);
  EXPECT_EQ(s.grand_total, 9130);
}

TEST(Parse, TotalsAlwaysRecomputed) {
  std::string raw = std::string(kFixtureBlock) + "TOTAL = 100\n";
  EXPECT_EQ(parse_judge_response(raw).grand_total, 9130);
}

std::unique_ptr<gateway::Gateway> judge_gateway(std::shared_ptr<gateway::ChatBackend> chat) {
  auto gw = std::make_unique<gateway::Gateway>();
  gw->add_chat("stub-judge", std::move(chat));
  gateway::RetryPolicy retry;
  retry.sleep = [](std::chrono::milliseconds) {};
  gw->set_retry(retry);
  return gw;
}

TEST(Judge, ScriptedFixtureScoresMatchBlock) {
  auto chat = std::make_shared<gateway::ScriptedChat>("scripted", std::vector<std::string>{kFixtureBlock});
  auto gw = judge_gateway(chat);
  auto s = judge::judge(plan(), pancakes(), {"stub-judge", {}}, *gw);
  EXPECT_EQ(s.grand_total, 9130);
  EXPECT_EQ(s.provenance.backend_id, "scripted");
  EXPECT_EQ(s.provenance.prompt_digest,
            build_judge_prompt(plan_document(plan()), pancakes()).digest);
}

TEST(Judge, OneRepromptOnBadBlock) {
  auto chat = std::make_shared<gateway::ScriptedChat>(
      "scripted", std::vector<std::string>{"SCORE consistency = 3\n", kFixtureBlock});
  auto gw = judge_gateway(chat);
  auto s = judge::judge(plan(), pancakes(), {"stub-judge", {}}, *gw);
  EXPECT_EQ(s.grand_total, 9130);
  ASSERT_EQ(chat->calls(), 2);
  EXPECT_NE(chat->prompts()[1].find("\n\nRepeat the SCORE block exactly."), std::string::npos);
}

TEST(Judge, SyntheticJudgeProducesValidScores) {
  auto gw = judge_gateway(std::make_shared<gateway::SyntheticChat>(3, "stub-judge"));
  auto s = judge::judge(plan(), pancakes(), {"stub-judge", {}}, *gw);
  EXPECT_GT(s.grand_total, 0);
  EXPECT_LE(s.grand_total, 10000);
  Points sum = 0;
  for (const auto& a : s.aspects) {
    Points inner = 0;
    for (auto& [id, v] : a.criteria) inner += v;
    EXPECT_EQ(inner, a.total);
    sum += a.total;
  }
  EXPECT_EQ(sum, s.grand_total);
}

TEST(Judge, BackendDownIsBackendUnavailable) {
  auto chat = std::make_shared<gateway::FunctionChat>(
      "down", [](const gateway::ChatRequest&) -> std::string { throw gateway::TransportError("refused"); });
  auto gw = judge_gateway(chat);
  EXPECT_THROW(judge::judge(plan(), pancakes(), {"stub-judge", {}}, *gw), gateway::BackendUnavailable);
}

TEST(Export, CsvAndFeedbackFile) {
  JudgedPlan j{"pancakes", model::Arm::VGTVP, parse_judge_response(kFixtureBlock)};
  std::vector<JudgedPlan> all{j};
  EXPECT_EQ(to_csv(all),
            "task_id,arm,aspect,score,total\n"
            "pancakes,vgtvp,textual_informativeness,23.6,91.3\n"
            "pancakes,vgtvp,visual_informativeness,22.7,91.3\n"
            "pancakes,vgtvp,temporal_alignment,22,91.3\n"
            "pancakes,vgtvp,plan_accuracy,23,91.3\n");
  auto dir = std::filesystem::temp_directory_path() / "mmplan_judge_feedback";
  auto path = write_feedback(dir, j);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("total: 91.3"), std::string::npos);
  EXPECT_NE(text.find("Thorough, with clear amounts."), std::string::npos);
  std::filesystem::remove_all(dir);
}

}  // namespace
