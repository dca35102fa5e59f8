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

// Acceptance suite for the primary component. Prints one PASS/FAIL line per
// criterion and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mmplan/dataset/dailypp.hpp"
#include "mmplan/gateway/backends.hpp"
#include "mmplan/gateway/config.hpp"
#include "mmplan/judge/judge.hpp"
#include "mmplan/metrics/metrics.hpp"
#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"
#include "mmplan/pipeline/pipeline.hpp"
#include "support/corpus.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mmplan;

namespace {

// Tolerances and runtime budgets, fixed here so a change is a visible diff.
constexpr double kBleuTolerance = 1e-9;
constexpr double kMeteorTolerance = 1e-5;
constexpr double kMssTolerance = 1e-12;
constexpr double kParseRateFloor = 0.95;
constexpr std::size_t kMinCorpusSize = 40;

struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_ms;
  std::function<void(Check&)> body;
};

const fs::path kTestData = MMPLAN_TEST_DATA;
const fs::path kDataDir = MMPLAN_DATA_DIR;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mmplan_accept_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return testing::read_all(p); }

// ---------------------------------------------------------------- criterion 1

std::vector<model::Judgment> votes(long long win, long long tie, long long lose) {
  std::vector<model::Judgment> out;
  int subject = 0;
  auto push = [&](model::Verdict v, long long n) {
    for (long long i = 0; i < n; ++i, ++subject) {
      for (auto a : model::kAllAspects) {
        out.push_back({"s" + std::to_string(subject), "cmp", a, v, "1970-01-01T00:00:00Z"});
      }
    }
  };
  push(model::Verdict::WinA, win);
  push(model::Verdict::Tie, tie);
  push(model::Verdict::WinB, lose);
  return out;
}

void preference_arithmetic(Check& c) {
  struct Row {
    long long w, t, l;
    const char *win, *tie, *lose;
  };
  for (const Row& r : {Row{22, 20, 8, "44.00", "40.00", "16.00"}, Row{10, 3, 1, "71.43", "21.43", "7.14"}}) {
    auto shares = metrics::aggregate_preferences(votes(r.w, r.t, r.l));
    for (auto a : model::kAllAspects) {
      const auto& s = shares.at(a);
      const std::string got = s.win.str() + "/" + s.tie.str() + "/" + s.lose.str();
      const std::string want = std::string(r.win) + "/" + r.tie + "/" + r.lose;
      c.expect(got == want, "(" + std::to_string(r.w) + "," + std::to_string(r.t) + "," +
                                std::to_string(r.l) + ") gave " + got + ", want " + want);
    }
  }
}

// ---------------------------------------------------------------- criterion 2

void judge_totals(Check& c) {
  const std::string raw = slurp(kTestData / "judge" / "response_91_3.txt");
  auto scores = judge::parse_judge_response(raw);
  const std::map<std::string, std::string> want{{"textual_informativeness", "23.6"},
                                                {"visual_informativeness", "22.7"},
                                                {"temporal_alignment", "22"},
                                                {"plan_accuracy", "23"}};
  for (const auto& [id, total] : want) {
    const auto* a = scores.aspect(id);
    c.expect(a != nullptr && judge::format_points(a->total) == total,
             id + " total " + (a ? judge::format_points(a->total) : "missing") + ", want " + total);
  }
  c.expect(scores.grand_total == 9130, "grand total " + judge::format_points(scores.grand_total));

  // Every criterion pushed just above its cap must be rejected.
  for (const auto& aspect : judge::Rubric::standard().aspects) {
    for (const auto& crit : aspect.criteria) {
      const std::regex line("SCORE " + crit.id + " = [0-9.]+");
      const std::string over = std::regex_replace(
          raw, line, "SCORE " + crit.id + " = " + judge::format_points(crit.cap + 10));
      bool rejected = false;
      try {
        judge::parse_judge_response(over);
      } catch (const judge::ScoreOutOfRange&) {
        rejected = true;
      }
      c.expect(rejected, crit.id + " above its cap was accepted");
    }
  }
}

// ---------------------------------------------------------------- criterion 3

// Brute force: every n-gram occurrence is counted by rescanning both
// sequences position by position.
double oracle_bleu(const metrics::Tokens& cand, const std::vector<metrics::Tokens>& refs, int max_n,
                   bool add_one) {
  if (cand.empty()) return 0.0;
  auto occurrences = [](const metrics::Tokens& seq, const metrics::Tokens& seqgram) {
    long long k = 0;
    for (std::size_t i = 0; i + seqgram.size() <= seq.size(); ++i) {
      bool eq = true;
      for (std::size_t j = 0; j < seqgram.size() && eq; ++j) eq = seq[i + j] == seqgram[j];
      k += eq;
    }
    return k;
  };
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    std::vector<metrics::Tokens> seen;
    long long clipped = 0, total = 0;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      metrics::Tokens g(cand.begin() + i, cand.begin() + i + n);
      ++total;
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      long long in_ref = 0;
      for (const auto& r : refs) in_ref = std::max(in_ref, occurrences(r, g));
      clipped += std::min(occurrences(cand, g), in_ref);
    }
    if (clipped == 0) {
      if (!add_one) return 0.0;
      log_sum += std::log(1.0 / static_cast<double>(total + 1));
    } else {
      log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
  }
  const double c_len = static_cast<double>(cand.size());
  double r_len = static_cast<double>(refs[0].size());
  for (const auto& r : refs) {
    const double len = static_cast<double>(r.size());
    if (std::fabs(len - c_len) < std::fabs(r_len - c_len) ||
        (std::fabs(len - c_len) == std::fabs(r_len - c_len) && len < r_len)) {
      r_len = len;
    }
  }
  const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return bp * std::exp(log_sum / max_n);
}

void bleu_oracle(Check& c) {
  std::mt19937 rng(20240601);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g", "h"};
  auto sequence = [&](int max_len) {
    std::uniform_int_distribution<int> len(1, max_len);
    std::uniform_int_distribution<int> word(0, static_cast<int>(vocab.size()) - 1);
    metrics::Tokens t(static_cast<std::size_t>(len(rng)));
    for (auto& w : t) w = vocab[static_cast<std::size_t>(word(rng))];
    return t;
  };
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    metrics::Tokens cand = sequence(12);
    std::vector<metrics::Tokens> refs{sequence(12)};
    if (i % 3 == 0) refs.push_back(sequence(12));
    const int max_n = 1 + i % 4;
    const bool add_one = i % 2 == 0;
    metrics::BleuConfig cfg{max_n, add_one ? metrics::Smoothing::AddOne : metrics::Smoothing::None};
    worst = std::max(worst, std::fabs(metrics::bleu(cand, refs, cfg) - oracle_bleu(cand, refs, max_n, add_one)));
  }
  c.expect(worst <= kBleuTolerance, "max |bleu - oracle| = " + std::to_string(worst));

  metrics::BleuConfig none{4, metrics::Smoothing::None};
  for (int i = 0; i < 20; ++i) {
    metrics::Tokens x = sequence(12);
    while (x.size() < 4) x.push_back("a");
    const std::vector<metrics::Tokens> self{x};
    c.expect(std::fabs(metrics::bleu(x, self, none) - 1.0) <= kBleuTolerance, "bleu(x,{x}) != 1");
  }
  const std::vector<metrics::Tokens> ref{{"the", "cat", "sat", "down"}};
  const double p1 = metrics::bleu({"the", "the", "the", "the"}, ref, {1, metrics::Smoothing::None});
  c.expect(std::fabs(p1 - 0.25) <= kBleuTolerance, "clipping case gave " + std::to_string(p1));
}

// ---------------------------------------------------------------- criterion 4

void meteor_closed_forms(Check& c) {
  const auto six = metrics::tokenize("the chef slices ripe green apples");
  const double same = metrics::meteor(six, six);
  c.expect(six.size() == 6 && std::fabs(same - 0.99769) <= kMeteorTolerance,
           "identical 6 tokens gave " + std::to_string(same));
  const double worked = metrics::meteor(metrics::tokenize("the cat sat"), metrics::tokenize("the cat sat down"));
  c.expect(std::fabs(worked - 0.75499) <= kMeteorTolerance, "worked example gave " + std::to_string(worked));
  const double disjoint = metrics::meteor(metrics::tokenize("red green blue"), metrics::tokenize("cat dog"));
  c.expect(disjoint == 0.0, "disjoint gave " + std::to_string(disjoint));
}

// ---------------------------------------------------------------- criterion 5

// Frames listed in a caller-chosen order.
class OrderedFrames : public metrics::FrameSource {
 public:
  explicit OrderedFrames(std::vector<std::string> refs) : refs_(std::move(refs)) {}
  metrics::FrameInfo info(const std::string&) override { return {static_cast<int>(refs_.size()), 24}; }
  std::string frame_ref(const std::string&, int i) override { return refs_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<std::string> refs_;
};

std::unique_ptr<gateway::Gateway> table_gateway(std::map<std::string, double> table) {
  auto gw = std::make_unique<gateway::Gateway>();
  gw->set_scorer(std::make_shared<gateway::TableScorer>(std::move(table)));
  return gw;
}

void mss_properties(Check& c) {
  metrics::MssConfig every_frame;
  every_frame.frame_rate = 1;
  {
    auto gw = table_gateway({{"f0", 0.2}, {"f1", 0.4}, {"f2", 0.6}});
    OrderedFrames frames({"f0", "f1", "f2"});
    const double v = metrics::mss("v", "p", every_frame, frames, *gw).value;
    c.expect(std::fabs(v - 0.4) <= kMssTolerance, "[0.2,0.4,0.6] gave " + std::to_string(v));
  }
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, double> table;
    std::vector<std::string> refs;
    for (int i = 0; i < 5 + trial; ++i) {
      refs.push_back("f" + std::to_string(i));
      table[refs.back()] = u(rng);
    }
    auto gw = table_gateway(table);
    OrderedFrames a(refs);
    const double va = metrics::mss("v", "p", every_frame, a, *gw).value;
    std::shuffle(refs.begin(), refs.end(), rng);
    OrderedFrames b(refs);
    const double vb = metrics::mss("v", "p", every_frame, b, *gw).value;
    c.expect(std::fabs(va - vb) <= kMssTolerance, "permutation changed mss");
    double lo = 1, hi = 0;
    for (const auto& [k, s] : table) lo = std::min(lo, s), hi = std::max(hi, s);
    c.expect(va >= lo && va <= hi, "mss outside per-frame extrema");
  }
  auto constant = std::make_unique<gateway::Gateway>();
  constant->set_scorer(std::make_shared<gateway::ConstantScorer>(0.5));
  metrics::SyntheticFrameSource frames(48, 24);
  c.expect(metrics::mss("v", "p", {}, frames, *constant).value == 0.5, "constant scorer");
}

// ---------------------------------------------------------------- criterion 6

std::unique_ptr<gateway::Gateway> stub_gateway(const fs::path& cache_dir) {
  json cfg = gateway::stub_config(7);
  if (!cache_dir.empty()) cfg["cache_dir"] = cache_dir.string();
  return gateway::build_gateway(cfg);
}

pipeline::RunConfig run_config(const std::string& run_id, std::vector<std::string> tasks) {
  pipeline::RunConfig rc;
  rc.run_id = run_id;
  rc.arm = model::Arm::VGTVP;
  rc.model_id = "stub-llm";
  rc.task_ids = std::move(tasks);
  rc.poll_interval = std::chrono::milliseconds(0);
  return rc;
}

pipeline::RunState run_pipeline(gateway::Gateway& gw, const pipeline::RunConfig& rc, const fs::path& ws) {
  pipeline::Pipeline p(gw, prompt::PromptEngine{}, pipeline::fixed_clock);
  p.set_sleep([](std::chrono::milliseconds) {});
  return p.run(rc, dataset::reference_manifest(), ws);
}

void end_to_end_determinism(Check& c) {
  const std::vector<std::string> tasks{"apple-juice", "pancakes", "carrot-mango-lassi"};
  const fs::path ws = scratch("determinism");
  for (const char* run : {"a", "b"}) {
    auto gw = stub_gateway({});
    auto state = run_pipeline(*gw, run_config(run, tasks), ws / run);
    c.expect(state.all_done(), std::string("run ") + run + " incomplete");
  }
  for (const auto& t : tasks) {
    const auto a = slurp(pipeline::artifact_path(ws / "a", "a", t, pipeline::Stage::Videos));
    const auto b = slurp(pipeline::artifact_path(ws / "b", "b", t, pipeline::Stage::Videos));
    c.expect(!a.empty() && a == b, t + ": GoalPlans differ between identical runs");
  }

  // Cache accounting baseline: one uninterrupted session on a cold cache.
  // Identical prompts shared between tasks legitimately hit within a session.
  gateway::GatewayStats cold;
  {
    auto gw = stub_gateway(ws / "cold-cache");
    run_pipeline(*gw, run_config("c", tasks), ws / "cold");
    cold = gw->stats();
  }

  const fs::path cache = ws / "cache";
  gateway::GatewayStats first;
  {
    auto gw = stub_gateway(cache);
    auto rc = run_config("c", tasks);
    rc.stop_after = pipeline::Stage::Foc;
    run_pipeline(*gw, rc, ws / "c");
    first = gw->stats();
  }
  auto gw = stub_gateway(cache);
  auto state = run_pipeline(*gw, run_config("c", tasks), ws / "c");
  const auto stats = gw->stats();
  c.expect(state.all_done(), "resumed run incomplete");
  const std::set<std::string> first_calls(first.backend_calls.begin(), first.backend_calls.end());
  int repeated = 0;
  for (const auto& call : stats.backend_calls) repeated += first_calls.count(call) > 0;
  c.expect(repeated == 0, std::to_string(repeated) + " backend calls repeated after resume");
  c.expect(first.cache_misses + stats.cache_misses == cold.cache_misses &&
               first.cache_hits + stats.cache_hits == cold.cache_hits,
           "cache accounting: interrupted " + std::to_string(first.cache_misses) + "m/" +
               std::to_string(first.cache_hits) + "h + resumed " + std::to_string(stats.cache_misses) + "m/" +
               std::to_string(stats.cache_hits) + "h vs cold " + std::to_string(cold.cache_misses) + "m/" +
               std::to_string(cold.cache_hits) + "h");
  int caption_calls = 0;
  for (const auto& call : stats.backend_calls) {
    caption_calls += call.rfind("caption:", 0) == 0;
  }
  c.expect(caption_calls == 0, "resume re-captioned videos");
  for (const auto& t : tasks) {
    const auto a = slurp(pipeline::artifact_path(ws / "a", "a", t, pipeline::Stage::Videos));
    const auto resumed = slurp(pipeline::artifact_path(ws / "c", "c", t, pipeline::Stage::Videos));
    c.expect(a == resumed, t + ": resumed GoalPlan differs from an uninterrupted run");
  }
  fs::remove_all(ws);
}

// ---------------------------------------------------------------- criterion 7

void parser_corpus(Check& c) {
  auto outcomes = testing::run_corpus(kTestData / "completions");
  c.expect(outcomes.size() >= kMinCorpusSize, "corpus has " + std::to_string(outcomes.size()) + " samples");
  std::size_t parsed = 0;
  std::set<std::string> strategies;
  for (const auto& o : outcomes) {
    if (o.parsed) {
      ++parsed;
    } else {
      c.expect(o.failure_has_raw, o.name + ": failure lost the raw text");
    }
  }
  for (const auto& f : fs::directory_iterator(kTestData / "completions")) {
    if (f.path().string().ends_with(".expected.json")) {
      auto doc = json::parse(slurp(f.path()));
      if (doc.contains("strategy")) strategies.insert(doc["strategy"].get<std::string>());
    }
  }
  c.expect(strategies.size() == 4, "corpus spans " + std::to_string(strategies.size()) + " strategies");
  const double rate = static_cast<double>(parsed) / static_cast<double>(outcomes.size());
  c.expect(rate >= kParseRateFloor, "parse rate " + std::to_string(rate));

  auto r = parser::parse_grounded(slurp(kTestData / "completions" / "g10-pocket-square.txt"));
  c.expect(r.steps.size() == 1, "pocket square step count");
  if (!r.steps.empty()) {
    c.expect(r.steps[0].text == "Finally, tuck the ends of the pocket square into your pocket to create a "
                                "neat and tidy appearance",
             "pocket square text");
    c.expect(r.steps[0].context == "Remember, the key to folding a pocket square is to be consistent and "
                                   "precise in your folds and to make sure the edges are aligned, and the "
                                   "corners are squared off.",
             "pocket square context");
    c.expect(r.steps[0].visual == "A person tucking the ends of a folded pocket square into their pocket, "
                                  "creating a neat and tidy appearance.",
             "pocket square visual");
  }
}

// ---------------------------------------------------------------- criterion 8

json& task_in(json& doc, const std::string& id) {
  for (auto& t : doc["tasks"]) {
    if (t["id"] == id) return t;
  }
  throw std::runtime_error("no task " + id);
}

void dataset_integrity(Check& c) {
  const json reference = model::json_io::parse_file(kDataDir / "dailypp" / "manifest.json");
  auto m = dataset::parse_manifest(reference);
  auto counts = m.counts();
  c.expect(counts.seen == 50 && counts.unseen == 15, "counts " + counts.summary());
  c.expect(m.domains.size() == 5, "domains " + std::to_string(m.domains.size()));

  auto violation = [&](const std::string& label, const std::function<void(json&)>& mutate,
                       std::string_view code) {
    json doc = reference;
    mutate(doc);
    try {
      dataset::parse_manifest(doc);
      c.expect(false, label + ": accepted");
    } catch (const dataset::IntegrityError& e) {
      c.expect(e.report().has(code), label + ": missing " + std::string(code) + " in " + e.report().summary());
    }
  };
  violation("six videos on a seen task", [](json& d) {
    auto& refs = task_in(d, "pancakes")["video_refs"];
    while (refs.size() > 6) refs.erase(refs.size() - 1);
  }, model::code::kVideoCountOutOfRange);
  violation("one related task", [](json& d) {
    auto& rel = task_in(d, "chicken-fried-rice")["related_seen"];
    rel.erase(rel.size() - 1);
  }, model::code::kRelatedSeenCardinality);
  violation("unseen to unseen relation", [](json& d) {
    task_in(d, "chicken-fried-rice")["related_seen"][1] = "beef-fried-rice";
  }, model::code::kRelatedNotSeen);
}

// ---------------------------------------------------------------- criterion 9

void unseen_composition(Check& c) {
  const auto& manifest = dataset::reference_manifest();
  const auto* task = manifest.find("carrot-mango-lassi");
  c.expect(task != nullptr && task->related_seen.size() == 2, "fixture task");
  if (task == nullptr) return;
  // Manifest order of the two related tasks, whatever order the task lists them in.
  std::vector<std::string> expected;
  for (const auto& t : manifest.tasks) {
    if (std::find(task->related_seen.begin(), task->related_seen.end(), t.id) != task->related_seen.end()) {
      expected.push_back(t.id);
    }
  }
  const fs::path ws = scratch("unseen");
  auto gw = stub_gateway({});
  auto rc = run_config("u", {"carrot-mango-lassi"});
  rc.stop_after = pipeline::Stage::Foc;
  run_pipeline(*gw, rc, ws);

  auto set = model::deserialize<model::CaptionSet>(model::json_io::parse_file(
      pipeline::artifact_path(ws, "u", "carrot-mango-lassi", pipeline::Stage::Captions)));
  c.expect(set.source_task_ids == expected, "caption set sources out of manifest order");
  std::size_t want_tracks = 0;
  for (const auto& id : expected) want_tracks += manifest.find(id)->video_refs.size();
  c.expect(set.tracks.size() == want_tracks, "track count " + std::to_string(set.tracks.size()));
  std::vector<std::string> origin_order;
  for (const auto& o : set.origins) {
    if (origin_order.empty() || origin_order.back() != o.task_id) origin_order.push_back(o.task_id);
  }
  c.expect(origin_order == expected, "tracks are not grouped by related task in manifest order");

  auto foc = model::deserialize<model::FusedCaption>(model::json_io::parse_file(
      pipeline::artifact_path(ws, "u", "carrot-mango-lassi", pipeline::Stage::Foc)));
  c.expect(foc.provenance.source_task_ids == expected, "fused caption provenance lacks source tasks");
  int caption_calls = 0;
  for (const auto& call : gw->stats().backend_calls) caption_calls += call.rfind("caption:", 0) == 0;
  c.expect(caption_calls == static_cast<int>(want_tracks), "caption calls " + std::to_string(caption_calls));
  fs::remove_all(ws);
}

// --------------------------------------------------------------- criterion 10

std::vector<model::TextPlan> three_plans() {
  model::VanillaTextPlan a;
  a.task_id = "apple-juice";
  a.steps = {{1, "Wash the apples", "Rinse the apples under cold water."},
             {2, "Slice the apples", "Cut the apples into quarters and remove the cores."},
             {3, "Juice the apples", "Feed the slices into the juicer."}};
  model::GroundedPlan b;
  b.task_id = "kimchi-fried-rice";
  b.steps = {{1, "Heat the oil", "Heat sesame oil in a wok.", "A person heating oil in a wok."},
             {2, "Fry the kimchi", "Fry chopped kimchi for two minutes.", "A person stirring kimchi in a wok."},
             {3, "Add the rice", "Add the rice and stir until hot.", "A person adding rice to the wok."}};
  model::GroundedPlan c;
  c.task_id = "fold-a-paper-crane";
  c.steps = {{1, "Fold the paper", "Fold the square in half twice.", "Hands folding a square of paper."},
             {2, "Shape the wings", "Pull the wings apart gently.", "Hands shaping paper wings."}};
  return {a, b, c};
}

void corpus_stats(Check& c) {
  // Oracle: lowercase, split on anything that is not a letter or digit, drop
  // words listed in the shipped stopword file, count with a map.
  std::set<std::string> stop;
  std::istringstream words(slurp(kDataDir / "lexicon" / "stopwords.txt"));
  for (std::string w; std::getline(words, w);) {
    if (!w.empty() && w[0] != '#') stop.insert(w);
  }
  std::map<std::string, long long> counts;
  auto count_text = [&](std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    std::string tok;
    for (char ch : s + " ") {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        tok += ch;
      } else if (!tok.empty()) {
        if (!stop.count(tok)) ++counts[tok];
        tok.clear();
      }
    }
  };
  const auto plans = three_plans();
  for (const auto& p : plans) {
    if (auto* v = std::get_if<model::VanillaTextPlan>(&p)) {
      for (const auto& s : v->steps) count_text(s.text), count_text(s.context);
    } else {
      for (const auto& s : std::get<model::GroundedPlan>(p).steps) {
        count_text(s.text), count_text(s.context), count_text(s.visual);
      }
    }
  }
  std::vector<std::pair<std::string, long long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  if (ranked.size() > 30) ranked.resize(30);

  auto table = dataset::corpus_stats(plans, dataset::Scope::All, dataset::TokenClass::Word, 30,
                                     dataset::Lexicon::shipped());
  c.expect(table.entries.size() == ranked.size(), "table size " + std::to_string(table.entries.size()) +
                                                      " vs oracle " + std::to_string(ranked.size()));
  for (std::size_t i = 0; i < std::min(table.entries.size(), ranked.size()); ++i) {
    c.expect(table.entries[i].token == ranked[i].first && table.entries[i].count == ranked[i].second,
             "row " + std::to_string(i) + ": " + table.entries[i].token + " " +
                 std::to_string(table.entries[i].count) + " vs " + ranked[i].first + " " +
                 std::to_string(ranked[i].second));
  }
  auto empty = dataset::corpus_stats({}, dataset::Scope::All, dataset::TokenClass::Word, 30,
                                     dataset::Lexicon::shipped());
  c.expect(empty.entries.empty(), "empty corpus gave entries");
}

// --------------------------------------------------------------- criterion 11

json run_cli(const std::string& args, int* status) {
  const std::string cmd = std::string(MMPLAN_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("cannot run " + cmd);
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  *status = ::pclose(pipe);
  return json::parse(out);
}

void survey_constraints(Check& c) {
  const fs::path ws = scratch("survey");
  std::vector<json> reports;
  for (int seed : {1, 2}) {
    int status = 0;
    json r = run_cli("survey --simulate --subjects 10 --comparisons 20 --tasks 10 --blinding-seed " +
                         std::to_string(seed) + " --workspace " + ws.string(),
                     &status);
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    c.expect(status == 0, tag + "cli exit status " + std::to_string(status));
    c.expect(r.at("submissions").get<int>() > 0, tag + "no submissions");
    c.expect(r.at("no_repeat_violations").get<int>() == 0, tag + "no-repeat rule violated");
    c.expect(r.at("duplicates_attempted").get<int>() > 0 &&
                 r.at("duplicates_rejected") == r.at("duplicates_attempted"),
             tag + "duplicate submissions accepted");
    c.expect(r.at("exported") == r.at("expected"), tag + "exported tallies differ from injected verdicts");
    reports.push_back(std::move(r));
  }
  c.expect(reports[0].at("exported") == reports[1].at("exported"),
           "de-blinded tallies depend on the blinding seed");
  fs::remove_all(ws);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Preference arithmetic reproduction", 1000, preference_arithmetic},
      {2, "Judge-total reproduction and cap rejection", 1000, judge_totals},
      {3, "BLEU oracle equivalence", 5000, bleu_oracle},
      {4, "METEOR-lite closed forms", 1000, meteor_closed_forms},
      {5, "MSS properties", 1000, mss_properties},
      {6, "End-to-end determinism and resume", 30000, end_to_end_determinism},
      {7, "Parser corpus", 5000, parser_corpus},
      {8, "Dataset integrity", 1000, dataset_integrity},
      {9, "Unseen composition", 5000, unseen_composition},
      {10, "Corpus stats oracle", 1000, corpus_stats},
      {11, "Survey constraints via CLI client", 10000, survey_constraints},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (ms > cr.budget_ms) {
      check.failures.push_back("took " + std::to_string(ms) + " ms, budget " + std::to_string(cr.budget_ms));
    }
    const bool ok = check.failures.empty();
    failed += !ok;
    std::printf("%s %2d  %-45s %9.1f ms\n", ok ? "PASS" : "FAIL", cr.id, cr.name.c_str(), ms);
    for (const auto& f : check.failures) std::printf("        - %s\n", f.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
