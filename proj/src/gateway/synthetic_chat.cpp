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

#include "mmplan/gateway/synthetic_chat.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <vector>

#include "mmplan/model/digest.hpp"

namespace mmplan::gateway {
namespace {

using model::format_decimal;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string strip_period(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::set<std::string> content_words(const std::string& text) {
  static const std::set<std::string> kStop{"a",    "an",   "the", "of",   "on",   "in",  "it",
                                          "with", "and",  "to",  "into", "is",   "are", "at",
                                          "for",  "from", "its", "their", "some", "up"};
  std::set<std::string> out;
  std::string word;
  for (char c : lower(text) + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      word += c;
    } else if (!word.empty()) {
      if (!kStop.count(word)) out.insert(word);
      word.clear();
    }
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1;
  std::size_t common = 0;
  for (const auto& w : a) common += b.count(w);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

struct StepIdea {
  std::string_view text;
  std::string_view context;
};

// Generic procedure skeleton; {task} is replaced by the lowercased task name.
constexpr std::array<StepIdea, 10> kIdeas{{
    {"Gather everything you need for {task}.",
     "Lay out the tools and materials so they are within reach before you begin."},
    {"Prepare your work area.", "Clear a flat surface and keep a towel nearby for spills."},
    {"Measure out the main components.",
     "Accurate amounts make the result consistent from one attempt to the next."},
    {"Clean and trim the materials.",
     "Remove anything damaged and rinse where appropriate."},
    {"Cut or shape the pieces as needed.",
     "Aim for even sizes so everything finishes at the same time."},
    {"Combine the components in order.",
     "Add the base first and the delicate parts last."},
    {"Apply heat or pressure carefully.",
     "Watch closely and adjust if anything starts to burn or slip."},
    {"Check progress and adjust.",
     "Taste, look or test the fit, and correct before moving on."},
    {"Let it rest or set for a few minutes.",
     "Resting lets flavors settle and joints or layers firm up."},
    {"Finish and present {task}.",
     "Clean up the edges, serve or display it, and put your tools away."},
}};

std::string fill(std::string_view pattern, const std::string& task) {
  std::string out(pattern);
  auto pos = out.find("{task}");
  if (pos != std::string::npos) out.replace(pos, 6, task);
  return out;
}

std::string task_name(const std::string& prompt) {
  static const std::regex re(R"(procedures? (?:for|of) (.+?)(?:\?| by using| with visualized|\n))");
  std::smatch m;
  if (!std::regex_search(prompt, m, re)) return "the task";
  std::string name = m[1].str();
  if (lower(name).rfind("how to ", 0) == 0) name = name.substr(7);
  return name;
}

std::string vanilla(const std::string& prompt, std::mt19937_64& rng) {
  std::string task = lower(task_name(prompt));
  std::vector<StepIdea> picked{kIdeas.front()};
  for (std::size_t i = 1; i + 1 < kIdeas.size(); ++i) {
    if (rng() % 3 != 0) picked.push_back(kIdeas[i]);
  }
  picked.push_back(kIdeas.back());

  const int style = static_cast<int>(rng() % 3);
  std::ostringstream out;
  if (rng() % 2 == 0) out << "Here is a step-by-step procedure for " << task << ":\n\n";
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const std::string text = fill(picked[i].text, task);
    const std::string ctx = fill(picked[i].context, task);
    switch (style) {
      case 0:
        out << (i + 1) << ". " << text << " " << ctx << "\n";
        break;
      case 1:
        out << "Step " << (i + 1) << ": " << text << "\n" << ctx << "\n\n";
        break;
      default:
        out << (i + 1) << ". **" << strip_period(text) << ":** " << ctx << "\n";
        break;
    }
  }
  if (rng() % 2 == 0) out << "\nEnjoy the result!\n";
  return out.str();
}

struct Caption {
  int video;
  double start;
  double end;
  std::string text;
  double position;  // segment rank within its video, in [0, 1)
};

std::vector<Caption> caption_lines(const std::string& prompt) {
  static const std::regex re(R"(^Video (\d+), ([0-9.]+)-([0-9.]+)s: (.+)$)");
  std::vector<Caption> out;
  std::map<int, int> per_video;
  for (const auto& line : lines_of(prompt)) {
    std::smatch m;
    if (!std::regex_match(line, m, re)) continue;
    Caption c{std::stoi(m[1].str()), std::stod(m[2].str()), std::stod(m[3].str()), m[4].str(), 0};
    per_video[c.video]++;
    out.push_back(std::move(c));
  }
  std::map<int, int> seen;
  for (auto& c : out) c.position = static_cast<double>(seen[c.video]++) / per_video[c.video];
  return out;
}

std::string person_sentence(const std::string& caption) {
  std::string t = strip_period(caption);
  std::string l = lower(t);
  for (std::string_view subject : {"a person ", "the person ", "someone ", "a man ", "a woman "}) {
    if (l.rfind(subject, 0) == 0) return "A person " + t.substr(subject.size());
  }
  if (l.rfind("hands ", 0) == 0) return "A person's " + t;
  return "A person works with " + l;
}

std::string fuse(const std::string& prompt, std::mt19937_64& rng) {
  const auto captions = caption_lines(prompt);
  if (captions.empty()) return std::string(SyntheticChat::kRefusal);
  struct Cluster {
    std::set<std::string> words;
    std::string text;
    std::vector<const Caption*> members;
    double position = 0;
  };
  std::vector<Cluster> clusters;
  for (const auto& c : captions) {
    auto words = content_words(c.text);
    auto it = std::find_if(clusters.begin(), clusters.end(),
                           [&](const Cluster& k) { return jaccard(k.words, words) >= 0.6; });
    if (it == clusters.end()) {
      clusters.push_back({words, c.text, {&c}, 0});
    } else {
      it->members.push_back(&c);
    }
  }
  for (auto& k : clusters) {
    double sum = 0;
    for (const auto* m : k.members) sum += m->position;
    k.position = sum / static_cast<double>(k.members.size());
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.position < b.position; });

  const bool cite = rng() % 4 != 0;
  std::ostringstream out;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    out << (i + 1) << ". " << person_sentence(clusters[i].text);
    if (cite) {
      out << " (";
      for (std::size_t j = 0; j < clusters[i].members.size(); ++j) {
        const auto* m = clusters[i].members[j];
        out << (j ? "; " : "") << "Video " << m->video << ", " << format_decimal(m->start) << "-"
            << format_decimal(m->end) << "s";
      }
      out << ")";
    }
    out << ".\n";
  }
  return out.str();
}

std::string align(const std::string& prompt, std::mt19937_64& rng) {
  static const std::regex step_re(R"(^Step (\d+): (.*) — (.*)$)");
  static const std::regex foc_re(R"(^\d+\. (.+)$)");
  static const std::regex cite_re(R"( \(Video [^)]*\))");
  std::vector<std::pair<std::string, std::string>> steps;
  std::vector<std::string> visuals;
  bool in_captions = false;
  for (const auto& line : lines_of(prompt)) {
    if (line == "Video captions:") {
      in_captions = true;
      continue;
    }
    if (line == "Text plan:") {
      in_captions = false;
      continue;
    }
    std::smatch m;
    if (std::regex_match(line, m, step_re)) {
      steps.emplace_back(m[2].str(), m[3].str());
    } else if (in_captions && std::regex_match(line, m, foc_re)) {
      visuals.push_back(strip_period(std::regex_replace(m[1].str(), cite_re, "")));
    }
  }
  for (const auto& c : caption_lines(prompt)) visuals.push_back(person_sentence(c.text));
  if (steps.empty() || visuals.empty()) return std::string(SyntheticChat::kRefusal);

  const bool tagged = rng() % 2 == 0;
  const bool closing = rng() % 2 == 0;
  std::ostringstream out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& [text, context] = steps[i];
    auto want = content_words(text + " " + context);
    std::size_t best = i * visuals.size() / steps.size();
    double best_score = 0;
    for (std::size_t v = 0; v < visuals.size(); ++v) {
      double s = jaccard(want, content_words(visuals[v]));
      if (s > best_score) best_score = s, best = v;
    }
    std::string how = lower(strip_period(text));
    std::string visual = strip_period(visuals[best]) + ", showing how to " + how + ".";
    if (tagged) {
      out << "<text> " << text << (closing ? " </text>" : "") << "\n";
      out << "<context> " << context << (closing ? " </context>" : "") << "\n";
      out << "<visual> " << visual << (closing ? " </visual>" : "") << "\n\n";
    } else {
      out << "Step " << (i + 1) << ":\nText: " << text << "\nContext: " << context
          << "\nVisual: " << visual << "\n\n";
    }
  }
  return out.str();
}

std::string judge(const std::string& prompt, std::mt19937_64& rng) {
  static const std::regex score_re(R"(^SCORE ([a-z_]+) = <score out of ([0-9.]+)>$)");
  static const std::regex aspect_re(R"(^FEEDBACK ([a-z_]+): <)");
  std::ostringstream out;
  for (const auto& line : lines_of(prompt)) {
    std::smatch m;
    if (std::regex_match(line, m, score_re)) {
      double cap = std::stod(m[2].str());
      double u = 0.6 + 0.4 * static_cast<double>(rng() % 1001) / 1000.0;
      double value = std::floor(cap * u * 2) / 2;
      out << "SCORE " << m[1].str() << " = " << format_decimal(value) << "\n";
    } else if (std::regex_search(line, m, aspect_re)) {
      out << "FEEDBACK " << m[1].str() << ": The plan is clear and mostly complete.\n";
    }
  }
  std::string s = out.str();
  return s.empty() ? std::string(SyntheticChat::kRefusal) : s;
}

}  // namespace

std::string SyntheticChat::id() const {
  return "stub-chat/" + name_ + "/seed-" + std::to_string(seed_);
}

std::string SyntheticChat::complete(const ChatRequest& request) {
  const std::string& p = request.user_prompt;
  std::mt19937_64 rng(model::sha256_u64(std::to_string(seed_) + '\x1f' + request.system_prompt +
                                        '\x1f' + p));
  if (p.find("SCORE ") != std::string::npos) return judge(p, rng);
  if (p.find("<visual>") != std::string::npos) return align(p, rng);
  if (p.find("<person> <verb> <action>") != std::string::npos) return fuse(p, rng);
  if (p.find("step-by-step procedure") != std::string::npos) return vanilla(p, rng);
  return std::string(kRefusal);
}

}  // namespace mmplan::gateway
