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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "mmplan/gateway/backends.hpp"
#include "mmplan/gateway/errors.hpp"
#include "mmplan/metrics/metrics.hpp"
#include "mmplan/metrics/porter.hpp"

namespace {

using namespace mmplan;
using namespace mmplan::metrics;

// Brute-force sentence BLEU written without maps: every n-gram occurrence is
// counted by scanning the sequences directly.
double oracle_bleu(const Tokens& cand, const std::vector<Tokens>& refs, int max_n, bool add_one) {
  if (cand.empty()) return 0.0;
  auto occurrences = [](const Tokens& seq, const Tokens& cand_seq, std::size_t at, int n) {
    int count = 0;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
      bool same = true;
      for (int k = 0; k < n && same; ++k) same = seq[i + k] == cand_seq[at + k];
      count += same;
    }
    return count;
  };
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    double clipped = 0;
    double total = 0;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      total += 1;
      // Count each distinct n-gram once, at its first occurrence.
      bool first = true;
      for (std::size_t j = 0; j < i && first; ++j) {
        bool same = true;
        for (int k = 0; k < n && same; ++k) same = cand[j + k] == cand[i + k];
        first = !same;
      }
      if (!first) continue;
      int in_cand = occurrences(cand, cand, i, n);
      int in_ref = 0;
      for (const auto& r : refs) in_ref = std::max(in_ref, occurrences(r, cand, i, n));
      clipped += std::min(in_cand, in_ref);
    }
    double p;
    if (clipped == 0) {
      if (!add_one) return 0.0;
      p = 1.0 / (total + 1.0);
    } else {
      p = clipped / total;
    }
    log_sum += std::log(p);
  }
  double c = static_cast<double>(cand.size());
  double r = static_cast<double>(refs[0].size());
  for (const auto& ref : refs) {
    double len = static_cast<double>(ref.size());
    if (std::fabs(len - c) < std::fabs(r - c) || (std::fabs(len - c) == std::fabs(r - c) && len < r)) {
      r = len;
    }
  }
  double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / max_n);
}

TEST(Porter, MatchesReferenceVocabulary) {
  std::ifstream in(std::string(MMPLAN_TEST_DATA) + "/porter_vocabulary.tsv");
  ASSERT_TRUE(in.good());
  int checked = 0;
  std::vector<std::string> mismatches;
  for (std::string line; std::getline(in, line);) {
    auto tab = line.find('\t');
    std::string word = line.substr(0, tab);
    std::string want = line.substr(tab + 1);
    ++checked;
    if (porter_stem(word) != want) mismatches.push_back(word + " -> " + porter_stem(word) + " (want " + want + ")");
  }
  EXPECT_GT(checked, 1000);
  for (std::size_t i = 0; i < std::min<std::size_t>(mismatches.size(), 20); ++i) {
    ADD_FAILURE() << mismatches[i];
  }
  EXPECT_TRUE(mismatches.empty()) << mismatches.size() << " mismatches";
}

TEST(Porter, ClassicExamples) {
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("ponies"), "poni");
  EXPECT_EQ(porter_stem("hopping"), "hop");
  EXPECT_EQ(porter_stem("filing"), "file");
  EXPECT_EQ(porter_stem("relational"), "relat");
  EXPECT_EQ(porter_stem("generalizations"), "gener");
  EXPECT_EQ(porter_stem("as"), "as");
}

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Don't stir, the SAUCE!"), (Tokens{"don't", "stir", "the", "sauce"}));
  EXPECT_TRUE(tokenize("  ...  ").empty());
}

TEST(Bleu, IdentityIsOne) {
  Tokens x = tokenize("boil the water and add a pinch of salt");
  std::vector<Tokens> refs{x};
  EXPECT_DOUBLE_EQ(bleu(x, refs, {4, Smoothing::None}), 1.0);
}

TEST(Bleu, ClippedUnigramHandCount) {
  std::vector<Tokens> refs{tokenize("the cat sat down")};
  EXPECT_NEAR(bleu(tokenize("the the the the"), refs, {1, Smoothing::None}), 0.25, 1e-12);
}

TEST(Bleu, EmptyCandidateIsZeroAndEmptyReferencesThrow) {
  std::vector<Tokens> refs{tokenize("a b")};
  EXPECT_EQ(bleu({}, refs), 0.0);
  EXPECT_THROW(bleu(tokenize("a"), std::vector<Tokens>{}), EmptyReference);
  EXPECT_THROW(bleu(tokenize("a"), refs, {10, Smoothing::None}), PreconditionError);
  EXPECT_THROW(bleu(tokenize("a"), refs, {0, Smoothing::None}), PreconditionError);
}

TEST(Bleu, MatchesBruteForceOracleOnRandomPairs) {
  std::mt19937 rng(2024);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  auto random_seq = [&](int min_len) {
    std::uniform_int_distribution<int> len(min_len, 12);
    std::uniform_int_distribution<int> word(0, static_cast<int>(vocab.size()) - 1);
    Tokens t;
    for (int i = len(rng); i > 0; --i) t.push_back(vocab[word(rng)]);
    return t;
  };
  for (int trial = 0; trial < 100; ++trial) {
    Tokens cand = random_seq(1);
    std::vector<Tokens> refs;
    for (int r = 1 + trial % 3; r > 0; --r) refs.push_back(random_seq(1));
    for (int max_n = 1; max_n <= 4; ++max_n) {
      for (bool add_one : {false, true}) {
        BleuConfig cfg{max_n, add_one ? Smoothing::AddOne : Smoothing::None};
        double got = bleu(cand, refs, cfg);
        EXPECT_NEAR(got, oracle_bleu(cand, refs, max_n, add_one), 1e-9) << "trial " << trial;
        EXPECT_GE(got, 0.0);
        EXPECT_LE(got, 1.0);
      }
    }
  }
}

TEST(Bleu, MatchedPairStaysOneAsMaxNGrows) {
  Tokens x = tokenize("one two three four five six seven eight nine ten");
  std::vector<Tokens> refs{x};
  for (int n = 1; n <= 9; ++n) EXPECT_DOUBLE_EQ(bleu(x, refs, {n, Smoothing::None}), 1.0);
}

TEST(Meteor, DisjointIsZero) {
  EXPECT_EQ(meteor(tokenize("red fox"), tokenize("blue whale")), 0.0);
}

TEST(Meteor, PrefixSentence) {
  auto d = meteor_detail(tokenize("the cat sat"), tokenize("the cat sat down"));
  EXPECT_EQ(d.matches, 3);
  EXPECT_EQ(d.chunks, 1);
  EXPECT_NEAR(d.f_mean, 0.769230769, 1e-9);
  EXPECT_NEAR(d.penalty, 0.018518519, 1e-9);
  EXPECT_NEAR(d.score, 0.754985755, 1e-9);
}

TEST(Meteor, IdenticalSixTokens) {
  auto x = tokenize("whisk the eggs in a bowl");
  EXPECT_NEAR(meteor(x, x), 0.997685185, 1e-9);
}

TEST(Meteor, IdentityAtLeastPointNineNineForFiveTokens) {
  std::mt19937 rng(5);
  const std::vector<std::string> vocab{"pour", "the", "milk", "into", "a", "glass", "slowly"};
  for (int trial = 0; trial < 50; ++trial) {
    Tokens x;
    for (int i = 5 + trial % 8; i > 0; --i) x.push_back(vocab[rng() % vocab.size()]);
    EXPECT_GE(meteor(x, x), 0.99);
  }
}

TEST(Meteor, StemStageMatchesInflections) {
  auto with = meteor_detail(tokenize("slicing apples"), tokenize("sliced apple"));
  EXPECT_EQ(with.matches, 2);
  MeteorConfig exact_only;
  exact_only.stem_stage = false;
  EXPECT_EQ(meteor_detail(tokenize("slicing apples"), tokenize("sliced apple"), exact_only).matches, 0);
}

TEST(Meteor, ChunksCountReordering) {
  auto d = meteor_detail(tokenize("sat the cat"), tokenize("the cat sat"));
  EXPECT_EQ(d.matches, 3);
  EXPECT_EQ(d.chunks, 2);
}

TEST(Meteor, EmptyInputThrows) {
  EXPECT_THROW(meteor({}, tokenize("a")), EmptyInput);
  EXPECT_THROW(meteor(tokenize("a"), {}), EmptyInput);
}

std::vector<model::Judgment> votes(model::Aspect a, int win, int tie, int lose) {
  std::vector<model::Judgment> out;
  auto add = [&](model::Verdict v, int n) {
    for (int i = 0; i < n; ++i) out.push_back({"s" + std::to_string(out.size()), "c", a, v, ""});
  };
  add(model::Verdict::WinA, win);
  add(model::Verdict::Tie, tie);
  add(model::Verdict::WinB, lose);
  return out;
}

TEST(Preferences, TwentyTwoTwentyEightOfFifty) {
  auto s = share({model::Aspect::PlanAccuracy, 22, 20, 8});
  EXPECT_EQ(s.win.str(), "44.00");
  EXPECT_EQ(s.tie.str(), "40.00");
  EXPECT_EQ(s.lose.str(), "16.00");
}

TEST(Preferences, TenThreeOneOfFourteen) {
  auto s = share({model::Aspect::PlanAccuracy, 10, 3, 1});
  EXPECT_EQ(s.win.str(), "71.43");
  EXPECT_EQ(s.tie.str(), "21.43");
  EXPECT_EQ(s.lose.str(), "7.14");
}

TEST(Preferences, EmptyTallyThrows) {
  EXPECT_THROW(share({model::Aspect::PlanAccuracy, 0, 0, 0}), EmptySample);
}

TEST(Preferences, HalfUpRounding) {
  EXPECT_EQ(percent_half_up(1, 8).str(), "12.50");
  EXPECT_EQ(percent_half_up(1, 16).str(), "6.25");
  EXPECT_EQ(percent_half_up(1, 32).str(), "3.13");  // 3.125 goes up
  EXPECT_EQ(percent_half_up(2, 3).str(), "66.67");
}

TEST(Preferences, AggregateAllAspects) {
  std::vector<model::Judgment> all;
  for (auto a : model::kAllAspects) {
    auto v = votes(a, 22, 20, 8);
    all.insert(all.end(), v.begin(), v.end());
  }
  auto out = aggregate_preferences(all);
  ASSERT_EQ(out.size(), 4u);
  for (auto& [aspect, s] : out) {
    EXPECT_EQ(s.win.str(), "44.00");
    // Unrounded shares sum to exactly 100.
    EXPECT_EQ(10000 * (s.tally.win + s.tally.tie + s.tally.lose) % s.tally.total(), 0);
    EXPECT_EQ(10000 * s.tally.total() / s.tally.total(), 10000);
  }
  EXPECT_THROW(aggregate_preferences(votes(model::Aspect::PlanAccuracy, 1, 0, 0)), EmptySample);
}

std::unique_ptr<gateway::Gateway> scoring_gateway(std::shared_ptr<gateway::SimilarityScorer> scorer) {
  auto gw = std::make_unique<gateway::Gateway>();
  gw->set_scorer(std::move(scorer));
  gateway::RetryPolicy retry;
  retry.sleep = [](std::chrono::milliseconds) {};
  gw->set_retry(retry);
  return gw;
}

TEST(Mss, ConstantScorer) {
  auto gw = scoring_gateway(std::make_shared<gateway::ConstantScorer>(0.5));
  SyntheticFrameSource frames(48, 24);
  auto r = mss("stub://video/a.mp4", "a person slices apples", {}, frames, *gw);
  EXPECT_DOUBLE_EQ(r.value, 0.5);
  EXPECT_EQ(r.frame_scores.size(), 3u);  // frames 0, 20, 40
}

TEST(Mss, MeanOfFrameScoresAndOrderInvariance) {
  SyntheticFrameSource frames(3, 24);
  MssConfig cfg;
  cfg.frame_rate = 1;
  std::map<std::string, double> table{{"v#frame=0", 0.2}, {"v#frame=1", 0.4}, {"v#frame=2", 0.6}};
  auto gw = scoring_gateway(std::make_shared<gateway::TableScorer>(table));
  auto r = mss("v", "p", cfg, frames, *gw);
  EXPECT_NEAR(r.value, 0.4, 1e-12);
  EXPECT_EQ(r.warnings.size(), 1u);  // 1 is not a declared rate

  std::vector<double> scores{0.6, 0.2, 0.4};
  EXPECT_NEAR(mean(scores), r.value, 1e-12);
  EXPECT_GE(r.value, *std::min_element(scores.begin(), scores.end()));
  EXPECT_LE(r.value, *std::max_element(scores.begin(), scores.end()));
}

TEST(Mss, NoFramesAndNoScorer) {
  SyntheticFrameSource empty(0, 24);
  auto gw = scoring_gateway(std::make_shared<gateway::ConstantScorer>(0.5));
  EXPECT_THROW(mss("v", "p", {}, empty, *gw), NoFrames);
  gateway::Gateway bare;
  SyntheticFrameSource frames(10, 24);
  EXPECT_THROW(mss("v", "p", {}, frames, bare), gateway::ScorerUnavailable);
}

TEST(Mss, SamplingModes) {
  MssConfig stride;
  stride.frame_rate = 5;
  EXPECT_EQ(sample_frames({12, 24}, stride), (std::vector<int>{0, 5, 10}));
  MssConfig fps;
  fps.sampling = FrameSampling::Fps;
  fps.frame_rate = 10;
  // 24 fps source sampled at 10 fps: every 2.4 source frames.
  EXPECT_EQ(sample_frames({12, 24}, fps), (std::vector<int>{0, 2, 5, 7, 10}));
}

TEST(Mss, ListedFrameSourceReadsSidecar) {
  auto dir = std::filesystem::temp_directory_path() / "mmplan_listed_frames";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "clip.mp4.frames.json");
    f << R"({"fps": 24, "frames": ["f0.png", "f1.png", "f2.png"]})";
  }
  ListedFrameSource src;
  const std::string uri = "file://" + (dir / "clip.mp4").string();
  EXPECT_EQ(src.info(uri).frame_count, 3);
  EXPECT_EQ(src.frame_ref(uri, 2), "f2.png");
  std::filesystem::remove_all(dir);
}

TEST(Report, NineDecimalsAndCsv) {
  EXPECT_EQ(format_report(0.318871641), "0.318871641");
  std::vector<MetricRow> rows{{"pancakes", model::Arm::VGTVP, "bleu", 0.1},
                              {"pancakes", model::Arm::Baseline, "meteor", 0.754985754985755}};
  EXPECT_EQ(to_csv(rows),
            "task_id,arm,metric,value\npancakes,vgtvp,bleu,0.1\npancakes,baseline,meteor,"
            "0.754985754985755\n");
}

}  // namespace
