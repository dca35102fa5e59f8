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

#include "mmplan/metrics/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "mmplan/metrics/porter.hpp"
#include "mmplan/model/json_io.hpp"

namespace mmplan::metrics {
namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, long long> ngram_counts(const Tokens& tokens, int n) {
  std::map<Ngram, long long> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

std::string strip_file_scheme(const std::string& uri) {
  constexpr std::string_view kScheme = "file://";
  return uri.rfind(kScheme, 0) == 0 ? uri.substr(kScheme.size()) : uri;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
               std::isalnum(static_cast<unsigned char>(text[i + 1]))) {
      cur += '\'';
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double bleu(const Tokens& candidate, std::span<const Tokens> references, const BleuConfig& config) {
  if (config.max_n < 1 || config.max_n > 9) throw PreconditionError("bleu max_n must be in 1..9");
  if (references.empty()) throw EmptyReference();
  if (candidate.empty()) return 0.0;

  double log_sum = 0;
  for (int n = 1; n <= config.max_n; ++n) {
    auto cand = ngram_counts(candidate, n);
    std::map<Ngram, long long> max_ref;
    for (const auto& ref : references) {
      for (auto& [g, c] : ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    long long clipped = 0;
    long long total = 0;
    for (auto& [g, c] : cand) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    double p;
    if (clipped == 0) {
      if (config.smoothing == Smoothing::None) return 0.0;
      p = 1.0 / static_cast<double>(total + 1);
    } else {
      p = static_cast<double>(clipped) / static_cast<double>(total);
    }
    log_sum += std::log(p);
  }

  const auto c = static_cast<long long>(candidate.size());
  long long r = static_cast<long long>(references.front().size());
  for (const auto& ref : references) {
    const auto len = static_cast<long long>(ref.size());
    const auto d = std::llabs(len - c);
    const auto best = std::llabs(r - c);
    if (d < best || (d == best && len < r)) r = len;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum / config.max_n);
}

MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference,
                           const MeteorConfig& config) {
  if (!(config.alpha > 0 && config.alpha < 1) || !(config.beta > 0) ||
      !(config.gamma >= 0 && config.gamma <= 1)) {
    throw PreconditionError("meteor parameters out of range");
  }
  if (candidate.empty()) throw EmptyInput("candidate");
  if (reference.empty()) throw EmptyInput("reference");

  std::vector<int> match(candidate.size(), -1);
  std::vector<bool> used(reference.size(), false);
  auto run_stage = [&](auto&& key) {
    std::vector<std::string> ref_keys;
    for (const auto& t : reference) ref_keys.push_back(key(t));
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (match[i] >= 0) continue;
      const std::string k = key(candidate[i]);
      int pick = -1;
      // Continuing the previous match keeps chunks long.
      if (i > 0 && match[i - 1] >= 0) {
        const std::size_t next = static_cast<std::size_t>(match[i - 1]) + 1;
        if (next < reference.size() && !used[next] && ref_keys[next] == k) pick = static_cast<int>(next);
      }
      for (std::size_t j = 0; pick < 0 && j < reference.size(); ++j) {
        if (!used[j] && ref_keys[j] == k) pick = static_cast<int>(j);
      }
      if (pick >= 0) {
        match[i] = pick;
        used[pick] = true;
      }
    }
  };
  run_stage([](const std::string& t) { return t; });
  if (config.stem_stage) run_stage([](const std::string& t) { return porter_stem(t); });

  MeteorDetail d;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (match[i] < 0) continue;
    ++d.matches;
    if (i == 0 || match[i - 1] < 0 || match[i] != match[i - 1] + 1) ++d.chunks;
  }
  if (d.matches == 0) return d;
  d.precision = static_cast<double>(d.matches) / static_cast<double>(candidate.size());
  d.recall = static_cast<double>(d.matches) / static_cast<double>(reference.size());
  d.f_mean = d.precision * d.recall / (config.alpha * d.precision + (1 - config.alpha) * d.recall);
  d.penalty = config.gamma * std::pow(static_cast<double>(d.chunks) / d.matches, config.beta);
  d.score = d.f_mean * (1 - d.penalty);
  return d;
}

double meteor(const Tokens& candidate, const Tokens& reference, const MeteorConfig& config) {
  return meteor_detail(candidate, reference, config).score;
}

std::string Percent::str() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", hundredths / 100, hundredths % 100);
  return buf;
}

Percent percent_half_up(long long count, long long total) {
  if (total <= 0) throw PreconditionError("percentage of an empty total");
  // round(10000 * count / total) with halves going up, in integers.
  return {(20000 * count + total) / (2 * total)};
}

PreferenceShare share(const PreferenceTally& tally) {
  if (tally.total() < 1) throw EmptySample(tally.aspect);
  return {tally, percent_half_up(tally.win, tally.total()), percent_half_up(tally.tie, tally.total()),
          percent_half_up(tally.lose, tally.total())};
}

std::map<model::Aspect, PreferenceShare> aggregate_preferences(
    std::span<const model::Judgment> judgments) {
  std::map<model::Aspect, PreferenceTally> tallies;
  for (auto a : model::kAllAspects) tallies[a].aspect = a;
  for (const auto& j : judgments) {
    auto& t = tallies[j.aspect];
    switch (j.verdict) {
      case model::Verdict::WinA:
        ++t.win;
        break;
      case model::Verdict::Tie:
        ++t.tie;
        break;
      case model::Verdict::WinB:
        ++t.lose;
        break;
    }
  }
  std::map<model::Aspect, PreferenceShare> out;
  for (const auto& [aspect, tally] : tallies) out.emplace(aspect, share(tally));
  return out;
}

bool is_declared_frame_rate(int frame_rate) {
  return frame_rate == 5 || frame_rate == 10 || frame_rate == 15 || frame_rate == 20;
}

std::string SyntheticFrameSource::frame_ref(const std::string& artifact_uri, int index) {
  return artifact_uri + "#frame=" + std::to_string(index);
}

const std::vector<std::string>& ListedFrameSource::frames(const std::string& artifact_uri,
                                                          double* fps) {
  auto it = loaded_.find(artifact_uri);
  if (it == loaded_.end()) {
    const std::string path = strip_file_scheme(artifact_uri) + ".frames.json";
    auto doc = model::json_io::parse_file(path);
    model::json_io::Reader r;
    double rate = r.number(doc, "fps", "");
    auto list = r.strings(doc, "frames", "");
    it = loaded_.emplace(artifact_uri, std::make_pair(rate, std::move(list))).first;
  }
  if (fps != nullptr) *fps = it->second.first;
  return it->second.second;
}

FrameInfo ListedFrameSource::info(const std::string& artifact_uri) {
  double fps = 0;
  const auto& list = frames(artifact_uri, &fps);
  return {static_cast<int>(list.size()), fps};
}

std::string ListedFrameSource::frame_ref(const std::string& artifact_uri, int index) {
  const auto& list = frames(artifact_uri, nullptr);
  if (index < 0 || static_cast<std::size_t>(index) >= list.size()) {
    throw PreconditionError("frame index out of range");
  }
  return list[static_cast<std::size_t>(index)];
}

std::vector<int> sample_frames(const FrameInfo& info, const MssConfig& config) {
  if (config.frame_rate < 1) throw PreconditionError("frame_rate must be >= 1");
  std::vector<int> out;
  if (info.frame_count <= 0) return out;
  if (config.sampling == FrameSampling::Stride) {
    for (int i = 0; i < info.frame_count; i += config.frame_rate) out.push_back(i);
    return out;
  }
  if (!(info.fps > 0)) throw PreconditionError("fps sampling needs the source frame rate");
  const double step = info.fps / config.frame_rate;
  for (int k = 0;; ++k) {
    const int idx = static_cast<int>(std::llround(k * step));
    if (idx >= info.frame_count) break;
    if (out.empty() || idx != out.back()) out.push_back(idx);
  }
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("mean of no values");
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

MssResult mss(const std::string& artifact_uri, const std::string& prompt, const MssConfig& config,
              FrameSource& frames, gateway::Gateway& gateway) {
  MssResult result;
  if (!is_declared_frame_rate(config.frame_rate)) {
    result.warnings.push_back("frame_rate " + std::to_string(config.frame_rate) +
                              " is outside {5,10,15,20}");
  }
  const auto indices = sample_frames(frames.info(artifact_uri), config);
  if (indices.empty()) throw NoFrames(artifact_uri);
  std::vector<std::string> refs;
  for (int i : indices) refs.push_back(frames.frame_ref(artifact_uri, i));

  result.frame_scores.assign(refs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < refs.size(); i = next++) {
      try {
        result.frame_scores[i] = gateway.similarity({refs[i], prompt});
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, config.max_parallel)),
                                                1, refs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  result.value = mean(result.frame_scores);
  return result;
}

std::string format_report(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", value);
  return buf;
}

std::string to_csv(std::span<const MetricRow> rows) {
  std::string out = "task_id,arm,metric,value\n";
  for (const auto& r : rows) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, r.value);
    out += r.task_id + "," + std::string(model::to_string(r.arm)) + "," + r.metric + "," +
           std::string(buf, res.ptr) + "\n";
  }
  return out;
}

}  // namespace mmplan::metrics
