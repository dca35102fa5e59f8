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
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"
#include "mmplan/survey/server.hpp"
#include "mmplan/survey/simulate.hpp"
#include "mmplan/survey/store.hpp"

namespace fs = std::filesystem;
using mmplan::model::Aspect;
using mmplan::model::TaskKind;
using mmplan::model::Verdict;
using namespace mmplan::survey;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("mmplan_survey_" + name + "_" +
                                              std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

Comparison cmp(std::string id, std::string task, std::string pairing = "tip-vs-vgtvp",
               TaskKind kind = TaskKind::Seen) {
  Comparison c;
  c.id = std::move(id);
  c.task_id = std::move(task);
  c.task_kind = kind;
  c.pairing = std::move(pairing);
  c.side_a = {"vgtvp", c.task_id + "/vgtvp.json"};
  c.side_b = {"baseline", c.task_id + "/baseline.json"};
  return c;
}

std::map<Aspect, BlindVerdict> all(BlindVerdict v) {
  std::map<Aspect, BlindVerdict> out;
  for (auto a : mmplan::model::kAllAspects) out[a] = v;
  return out;
}

// Translates a canonical verdict into what a subject clicks on screen.
BlindVerdict click(Verdict v, bool a_left) {
  if (v == Verdict::Tie) return BlindVerdict::Tie;
  return (v == Verdict::WinA) == a_left ? BlindVerdict::Left : BlindVerdict::Right;
}

std::string judge_next(SurveyStore& store, const std::string& subject, Verdict v = Verdict::Tie) {
  Assignment a = store.next_assignment(subject);
  store.submit(subject, a.comparison.id, all(click(v, a.a_on_left)));
  return a.comparison.id;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST(SurveyStore, JudgedTaskIsNeverAssignedAgain) {
  SurveyStore store;
  store.add_comparison(cmp("kimchi-model-a", "kimchi-fried-rice"));
  Comparison other = cmp("kimchi-model-b", "kimchi-fried-rice");
  other.side_b.label = "model-b";
  store.add_comparison(other);
  store.add_comparison(cmp("spaghetti", "spaghetti"));

  auto s = store.register_subject().subject_id;
  EXPECT_EQ(judge_next(store, s), "kimchi-model-a");
  EXPECT_EQ(store.seen_tasks(s), std::set<std::string>{"kimchi-fried-rice"});
  EXPECT_EQ(judge_next(store, s), "spaghetti");
  EXPECT_THROW(store.next_assignment(s), NoneAvailable);
}

TEST(SurveyStore, LeastJudgedComparisonComesFirst) {
  SurveyStore store;
  store.add_comparison(cmp("c1", "t1"));
  judge_next(store, store.register_subject().subject_id);
  judge_next(store, store.register_subject().subject_id);
  store.add_comparison(cmp("c3", "t3"));
  EXPECT_EQ(judge_next(store, store.register_subject().subject_id), "c3");
  store.add_comparison(cmp("c2", "t2"));
  ASSERT_EQ(store.judged_count("c1"), 2);
  ASSERT_EQ(store.judged_count("c2"), 0);
  ASSERT_EQ(store.judged_count("c3"), 1);

  auto fresh = store.register_subject().subject_id;
  EXPECT_EQ(store.next_assignment(fresh).comparison.id, "c2");
}

TEST(SurveyStore, TiesBreakByComparisonId) {
  SurveyStore store;
  store.add_comparison(cmp("b", "t2"));
  store.add_comparison(cmp("a", "t1"));
  EXPECT_EQ(store.next_assignment(store.register_subject().subject_id).comparison.id, "a");
}

TEST(SurveyStore, SeenEverythingMeansNoneAvailable) {
  SurveyStore store;
  store.add_comparison(cmp("c1", "t1"));
  auto s = store.register_subject().subject_id;
  judge_next(store, s);
  EXPECT_THROW(store.next_assignment(s), NoneAvailable);
  SurveyStore empty;
  EXPECT_THROW(empty.next_assignment(empty.register_subject().subject_id), NoneAvailable);
}

TEST(SurveyStore, TaskBecomesSeenOnSubmissionNotAssignment) {
  SurveyStore store;
  store.add_comparison(cmp("c1", "t1"));
  auto s = store.register_subject().subject_id;
  Assignment a = store.next_assignment(s);
  EXPECT_TRUE(store.seen_tasks(s).empty());
  // Asking again before submitting hands out the same pair.
  EXPECT_EQ(store.next_assignment(s).comparison.id, a.comparison.id);
  EXPECT_EQ(store.next_assignment(s).a_on_left, a.a_on_left);
  store.submit(s, "c1", all(BlindVerdict::Left));
  EXPECT_EQ(store.seen_tasks(s).size(), 1u);
}

TEST(SurveyStore, DuplicateSubmissionIsRejectedWhole) {
  SurveyStore store;
  store.add_comparison(cmp("c1", "t1"));
  auto s = store.register_subject().subject_id;
  judge_next(store, s, Verdict::WinA);
  EXPECT_THROW(store.submit(s, "c1", all(BlindVerdict::Right)), DuplicateSubmission);
  auto js = store.judgments();
  ASSERT_EQ(js.size(), 4u);
  for (const auto& j : js) EXPECT_EQ(j.verdict, Verdict::WinA);
}

TEST(SurveyStore, IncompleteAspectsPersistNothing) {
  fs::path dir = fresh_dir("incomplete");
  SurveyStore store(dir);
  store.add_comparison(cmp("c1", "t1"));
  auto s = store.register_subject().subject_id;
  store.next_assignment(s);
  const std::size_t before = line_count(dir / "events.jsonl");
  auto three = all(BlindVerdict::Left);
  three.erase(Aspect::PlanAccuracy);
  EXPECT_THROW(store.submit(s, "c1", three), IncompleteAspects);
  EXPECT_TRUE(store.judgments().empty());
  EXPECT_TRUE(store.seen_tasks(s).empty());
  EXPECT_EQ(line_count(dir / "events.jsonl"), before);
  // The subject can still complete the same assignment.
  store.submit(s, "c1", all(BlindVerdict::Left));
  EXPECT_EQ(store.judgments().size(), 4u);
  fs::remove_all(dir);
}

TEST(SurveyStore, SubmissionNeedsAnIssuedAssignment) {
  SurveyStore store;
  store.add_comparison(cmp("c1", "t1"));
  auto s = store.register_subject().subject_id;
  EXPECT_THROW(store.submit(s, "c1", all(BlindVerdict::Tie)), UnknownAssignment);
  EXPECT_THROW(store.submit("subject-999", "c1", all(BlindVerdict::Tie)), UnknownSubject);
  EXPECT_THROW(store.next_assignment("subject-999"), UnknownSubject);
}

TEST(SurveyStore, ComparisonSidesMustDiffer) {
  SurveyStore store;
  Comparison c = cmp("c1", "t1");
  c.side_b.label = c.side_a.label;
  EXPECT_THROW(store.add_comparison(c), mmplan::PreconditionError);
  store.add_comparison(cmp("c2", "t2"));
  EXPECT_NO_THROW(store.add_comparison(cmp("c2", "t2")));
  EXPECT_THROW(store.add_comparison(cmp("c2", "t9")), mmplan::PreconditionError);
}

TEST(SurveyStore, ExportReproducesInjectedCounts) {
  SurveyStore store(fs::path{}, 11);
  store.add_comparison(cmp("kimchi", "kimchi-fried-rice", "tip-vs-vgtvp"));
  std::vector<Verdict> script(10, Verdict::WinA);
  script.insert(script.end(), 3, Verdict::Tie);
  script.push_back(Verdict::WinB);
  for (Verdict v : script) judge_next(store, store.register_subject().subject_id, v);

  auto tallies = store.export_tallies();
  ASSERT_EQ(tallies.size(), 1u);
  const auto& t = tallies.at("tip-vs-vgtvp").at(Aspect::TextualInformative);
  EXPECT_EQ(t.win, 10);
  EXPECT_EQ(t.tie, 3);
  EXPECT_EQ(t.lose, 1);

  auto shares = mmplan::metrics::aggregate_preferences(store.judgments());
  EXPECT_EQ(shares.at(Aspect::TextualInformative).win.str(), "71.43");
}

TEST(SurveyStore, EmptyStoreExportsNothing) {
  SurveyStore store;
  EXPECT_TRUE(store.export_tallies().empty());
}

TEST(SurveyStore, ExportFiltersByKindAndPairing) {
  SurveyStore store;
  store.add_comparison(cmp("seen", "kimchi-fried-rice", "p1", TaskKind::Seen));
  store.add_comparison(cmp("unseen", "chicken-fried-rice", "p1", TaskKind::Unseen));
  store.add_comparison(cmp("other", "spaghetti", "p2", TaskKind::Seen));
  auto s = store.register_subject().subject_id;
  for (int i = 0; i < 3; ++i) judge_next(store, s, Verdict::WinA);

  TallyFilter unseen;
  unseen.kind = TaskKind::Unseen;
  auto t = store.export_tallies(unseen);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.at("p1").at(Aspect::PlanAccuracy).total(), 1);

  TallyFilter p2;
  p2.pairing = "p2";
  EXPECT_EQ(store.export_tallies(p2).size(), 1u);
  EXPECT_EQ(store.export_tallies().at("p1").at(Aspect::PlanAccuracy).total(), 2);
  p2.pairing = "missing";
  EXPECT_TRUE(store.export_tallies(p2).empty());
}

TEST(SurveyStore, DeblindedTalliesDoNotDependOnSeed) {
  auto run = [](std::uint64_t seed, int* left_count) {
    SurveyStore store(fs::path{}, seed);
    for (int c = 0; c < 6; ++c) store.add_comparison(cmp("c" + std::to_string(c), "t" + std::to_string(c)));
    const Verdict cycle[] = {Verdict::WinA, Verdict::WinA, Verdict::Tie, Verdict::WinB};
    int k = 0;
    for (int s = 0; s < 8; ++s) {
      auto id = store.register_subject().subject_id;
      for (int c = 0; c < 6; ++c) {
        Assignment a = store.next_assignment(id);
        *left_count += a.a_on_left;
        store.submit(id, a.comparison.id, all(click(cycle[k++ % 4], a.a_on_left)));
      }
    }
    return store.export_tallies();
  };
  int left1 = 0, left2 = 0;
  auto t1 = run(1, &left1);
  auto t2 = run(2, &left2);
  for (auto a : mmplan::model::kAllAspects) {
    const auto& x = t1.at("tip-vs-vgtvp").at(a);
    const auto& y = t2.at("tip-vs-vgtvp").at(a);
    EXPECT_EQ(x.win, y.win);
    EXPECT_EQ(x.tie, y.tie);
    EXPECT_EQ(x.lose, y.lose);
  }
  // Both seeds actually shuffle sides.
  EXPECT_GT(left1, 0);
  EXPECT_LT(left1, 48);
  EXPECT_GT(left2, 0);
  EXPECT_LT(left2, 48);
}

TEST(SurveyStore, DeblindMapsScreenSidesToCanonicalSides) {
  EXPECT_EQ(deblind(BlindVerdict::Left, true), Verdict::WinA);
  EXPECT_EQ(deblind(BlindVerdict::Left, false), Verdict::WinB);
  EXPECT_EQ(deblind(BlindVerdict::Right, true), Verdict::WinB);
  EXPECT_EQ(deblind(BlindVerdict::Right, false), Verdict::WinA);
  EXPECT_EQ(deblind(BlindVerdict::Tie, false), Verdict::Tie);
}

TEST(SurveyStore, StateSurvivesReopen) {
  fs::path dir = fresh_dir("reopen");
  Registration reg;
  {
    SurveyStore store(dir, 5);
    store.add_comparison(cmp("c1", "t1"));
    store.add_comparison(cmp("c2", "t2"));
    reg = store.register_subject();
    judge_next(store, reg.subject_id, Verdict::WinB);
  }
  SurveyStore again(dir, 5);
  EXPECT_EQ(again.judgments().size(), 4u);
  EXPECT_EQ(again.authenticate(reg.token), reg.subject_id);
  EXPECT_EQ(again.seen_tasks(reg.subject_id), std::set<std::string>{"t1"});
  EXPECT_EQ(again.next_assignment(reg.subject_id).comparison.id, "c2");

  // Only a digest of the token reaches disk.
  std::ifstream log(dir / "events.jsonl");
  std::string text((std::istreambuf_iterator<char>(log)), {});
  EXPECT_EQ(text.find(reg.token), std::string::npos);

  auto snap = mmplan::model::json_io::parse_file(dir / "snapshot.json");
  EXPECT_EQ(snap.at("judgment_count"), 4);
  EXPECT_EQ(snap.at("judged_per_comparison").at("c1"), 1);
  fs::remove_all(dir);
}

TEST(SurveyStore, TornFinalLineIsIgnored) {
  fs::path dir = fresh_dir("torn");
  {
    SurveyStore store(dir);
    store.add_comparison(cmp("c1", "t1"));
  }
  std::ofstream(dir / "events.jsonl", std::ios::app) << R"({"type":"subj)";
  SurveyStore again(dir);
  EXPECT_EQ(again.comparisons().size(), 1u);
  fs::remove_all(dir);
}

TEST(SurveyStore, ConcurrentDuplicateSubmissionsLandOnce) {
  SurveyStore store;
  store.add_comparison(cmp("c1", "t1"));
  auto s = store.register_subject().subject_id;
  store.next_assignment(s);
  std::atomic<int> ok{0}, dup{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      try {
        store.submit(s, "c1", all(BlindVerdict::Tie));
        ok++;
      } catch (const DuplicateSubmission&) {
        dup++;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 1);
  EXPECT_EQ(dup, 7);
  EXPECT_EQ(store.judgments().size(), 4u);
}

class SurveyHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    plans_ = fresh_dir("plans");
    fs::create_directories(plans_ / "pancakes");
    mmplan::model::GoalPlan g;
    g.task_id = "pancakes";
    mmplan::model::GroundedPlan tp;
    tp.task_id = "pancakes";
    tp.steps = {{1, "Whisk the batter.", "Until smooth.", "A person whisks batter."},
                {2, "Cook the pancakes.", "Flip once.", "A person flips a pancake."}};
    g.text_plan = tp;
    g.video_plan = {{1, "Whisk the batter.", "job-1", mmplan::model::JobStatus::Done,
                     "file:///videos/1.mp4", std::nullopt}};
    mmplan::model::json_io::write_atomic(plans_ / "pancakes/vgtvp.json",
                                         mmplan::model::serialize(g).dump());
    mmplan::model::VanillaTextPlan vtp;
    vtp.task_id = "pancakes";
    vtp.steps = {{1, "Mix.", "Use a bowl."}};
    g.arm = mmplan::model::Arm::Baseline;
    g.text_plan = vtp;
    g.video_plan.clear();
    mmplan::model::json_io::write_atomic(plans_ / "pancakes/baseline.json",
                                         mmplan::model::serialize(g).dump());

    server_ = std::make_unique<SurveyServer>(store_, ServerOptions{"admin-secret", plans_, {}});
    port_ = server_->start();
    url_ = "http://127.0.0.1:" + std::to_string(port_);
  }
  void TearDown() override {
    server_->stop();
    fs::remove_all(plans_);
  }

  SurveyStore store_;
  fs::path plans_;
  std::unique_ptr<SurveyServer> server_;
  int port_ = 0;
  std::string url_;
};

TEST_F(SurveyHttp, RoundTrip) {
  SurveyClient client(url_);
  client.add_comparisons("admin-secret", {cmp("pancakes", "pancakes")});
  Registration reg = client.register_subject("admin-secret");

  AssignmentView view = client.next_assignment(reg.token);
  EXPECT_EQ(view.comparison_id, "pancakes");
  EXPECT_EQ(view.left.label, "Plan A");
  EXPECT_EQ(view.right.label, "Plan B");
  const bool a_left = view.left.steps.size() == 2;
  const PlanView& ours = a_left ? view.left : view.right;
  ASSERT_EQ(ours.steps.size(), 2u);
  EXPECT_EQ(ours.steps[0].video_uri, "file:///videos/1.mp4");
  EXPECT_FALSE(ours.steps[1].video_uri.has_value());
  EXPECT_EQ(a_left, a_on_left(0, reg.subject_id, "pancakes"));

  auto three = all(BlindVerdict::Left);
  three.erase(Aspect::VisualInformative);
  EXPECT_THROW(client.submit(reg.token, "pancakes", three), IncompleteAspects);
  client.submit(reg.token, "pancakes", all(click(Verdict::WinA, a_left)));
  EXPECT_THROW(client.submit(reg.token, "pancakes", all(BlindVerdict::Tie)), DuplicateSubmission);
  EXPECT_THROW(client.next_assignment(reg.token), NoneAvailable);

  Tallies t = client.export_tallies("admin-secret");
  EXPECT_EQ(t.at("tip-vs-vgtvp").at(Aspect::PlanAccuracy).win, 1);
  TallyFilter unseen;
  unseen.kind = TaskKind::Unseen;
  EXPECT_TRUE(client.export_tallies("admin-secret", unseen).empty());
}

TEST_F(SurveyHttp, AdminAndSubjectTokensAreChecked) {
  SurveyClient client(url_);
  try {
    client.register_subject("wrong");
    FAIL() << "expected Unauthorized";
  } catch (const mmplan::Error& e) {
    EXPECT_EQ(e.category(), "Unauthorized");
  }
  EXPECT_THROW(client.export_tallies(""), mmplan::Error);
  EXPECT_THROW(client.next_assignment("not-a-token"), mmplan::Error);
}

TEST_F(SurveyHttp, AssignmentDoesNotRevealArms) {
  SurveyClient client(url_);
  client.add_comparisons("admin-secret", {cmp("pancakes", "pancakes")});
  Registration reg = client.register_subject("admin-secret");
  httplib::Client raw(url_);
  auto res = raw.Get("/api/assignment", {{"Authorization", "Bearer " + reg.token}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body.find("vgtvp"), std::string::npos);
  EXPECT_EQ(res->body.find("baseline"), std::string::npos);
  EXPECT_EQ(res->body.find("A person"), std::string::npos);

  auto bad = raw.Post("/api/judgments", {{"Authorization", "Bearer " + reg.token}},
                      R"({"schema_version":"1","comparison_id":"pancakes","verdicts":{"plan_accuracy":"up"}})",
                      "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
}

TEST(SurveySimulation, PoolRespectsConstraintsAndTalliesMatch) {
  SimulationConfig config;
  config.dir = fresh_dir("sim");
  SimulationReport r = simulate(config);
  EXPECT_EQ(r.submissions, 100);  // 10 subjects, one comparison per task, 10 tasks
  EXPECT_EQ(r.no_repeat_violations, 0);
  EXPECT_EQ(r.duplicates_attempted, 10);
  EXPECT_EQ(r.duplicates_rejected, 10);
  EXPECT_TRUE(r.tallies_match());
  EXPECT_LE(r.max_judged - r.min_judged, 1);

  config.blinding_seed = 2;
  SimulationReport other = simulate(config);
  EXPECT_EQ(tallies_to_json(other.exported), tallies_to_json(r.exported));
  fs::remove_all(config.dir);
}
