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

#include "mmplan/parser/plan_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

namespace mmplan::parser {
namespace {

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

// A sentence ends at . ! or ? followed by whitespace.
std::size_t sentence_break(std::string_view s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((s[i] == '.' || s[i] == '!' || s[i] == '?') &&
        std::isspace(static_cast<unsigned char>(s[i + 1]))) {
      return i;
    }
  }
  return std::string_view::npos;
}

std::pair<std::string, std::string> split_head(const std::string& head,
                                               const std::vector<std::string>& continuation) {
  std::string text;
  std::string rest;
  std::size_t colon = head.find(':');
  while (colon != std::string::npos && colon + 1 < head.size() &&
         !std::isspace(static_cast<unsigned char>(head[colon + 1]))) {
    colon = head.find(':', colon + 1);
  }
  const std::size_t brk = sentence_break(head);
  if (colon != std::string::npos && colon > 0 && colon <= 120 &&
      (brk == std::string::npos || brk > colon)) {
    text = trim(std::string_view(head).substr(0, colon));
    rest = head.substr(colon + 1);
  } else if (brk != std::string::npos) {
    text = trim(std::string_view(head).substr(0, brk + 1));
    rest = head.substr(brk + 1);
  } else {
    text = trim(head);
  }
  std::vector<std::string> parts{trim(rest)};
  parts.insert(parts.end(), continuation.begin(), continuation.end());
  return {text, join(parts)};
}

struct Item {
  int number = 0;
  std::string head;
  std::vector<std::string> continuation;
};

struct Collected {
  std::vector<Item> items;
  int stray = 0;
  int discarded_runs = 0;
};

const std::regex& numbered_re() {
  static const std::regex re(R"(^\s*(?:(\d{1,3})[.)]|\((\d{1,3})\))(?:\s+(.*))?$)");
  return re;
}

const std::regex& step_prefix_re() {
  static const std::regex re(R"(^\s*step\s+(\d{1,3})\s*(?:[:.)\-]\s*(.*))?$)",
                             std::regex::icase);
  return re;
}

bool parse_item_line(Strategy s, const std::string& line, Item& out) {
  std::smatch m;
  if (s == Strategy::NumberedList) {
    if (!std::regex_match(line, m, numbered_re())) return false;
    out.number = std::stoi(m[1].matched ? m[1].str() : m[2].str());
    out.head = trim(m[3].str());
  } else {
    if (!std::regex_match(line, m, step_prefix_re())) return false;
    out.number = std::stoi(m[1].str());
    out.head = trim(m[2].str());
  }
  return true;
}

std::string strip_bullet(const std::string& line) {
  std::string t = trim(line);
  for (std::string_view b : {"- ", "* ", "• "}) {
    if (t.rfind(b, 0) == 0) return trim(std::string_view(t).substr(b.size()));
  }
  return t;
}

Collected collect(Strategy s, const std::vector<std::string>& lines) {
  Collected c;
  std::vector<std::vector<Item>> runs;
  bool blank_since = false;
  for (const auto& line : lines) {
    Item item;
    if (parse_item_line(s, line, item)) {
      if (runs.empty() || runs.back().empty() || item.number <= runs.back().back().number) {
        runs.emplace_back();
      }
      runs.back().push_back(std::move(item));
      blank_since = false;
      continue;
    }
    if (is_blank(line)) {
      blank_since = true;
      continue;
    }
    if (runs.empty()) continue;  // preamble
    const bool indented = std::isspace(static_cast<unsigned char>(line[0])) ||
                          line[0] == '-' || line[0] == '*';
    if (!blank_since || indented) {
      runs.back().back().continuation.push_back(strip_bullet(line));
    } else {
      ++c.stray;
    }
  }
  if (runs.empty()) return c;
  // Numbering that restarts (say an ingredient list before the method)
  // splits the output into runs; the longest run is the plan.
  auto best = std::max_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return a.size() < b.size();
  });
  c.items = std::move(*best);
  c.discarded_runs = static_cast<int>(runs.size()) - 1;
  return c;
}

template <class Emit>
bool run_list_strategies(const std::vector<std::string>& lines, ParseDiagnostics& diag, Emit emit) {
  for (Strategy s : {Strategy::NumberedList, Strategy::StepPrefix}) {
    Collected c = collect(s, lines);
    int produced = 0;
    int dropped = 0;
    for (auto& item : c.items) {
      if (item.head.empty() && !item.continuation.empty()) {
        item.head = item.continuation.front();
        item.continuation.erase(item.continuation.begin());
      }
      if (item.head.empty()) {
        ++dropped;
        continue;
      }
      emit(item);
      ++produced;
    }
    if (produced == 0) continue;
    diag.strategy_used = s;
    diag.dropped_lines = dropped + c.stray;
    if (dropped > 0) diag.warnings.push_back(std::to_string(dropped) + " empty list items skipped");
    if (c.discarded_runs > 0) {
      diag.warnings.push_back(std::to_string(c.discarded_runs) +
                              " shorter numbered run(s) ignored");
    }
    return true;
  }
  return false;
}

enum Field { kText = 0, kContext = 1, kVisual = 2 };
constexpr std::array<std::string_view, 3> kFieldNames{"text", "context", "visual"};

std::optional<Field> field_of(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (int f = 0; f < 3; ++f) {
    if (kFieldNames[f] == name) return static_cast<Field>(f);
  }
  return std::nullopt;
}

struct Event {
  Field field;
  std::string content;
  bool from_tag;
};

std::vector<Event> scan_fields(const std::vector<std::string>& lines) {
  static const std::regex header_re(R"(^\s*(?:step\s+\d+|\d+[.)]|\(\d+\))\s*[:.)\-]?\s*$)",
                                    std::regex::icase);
  static const std::regex prefix_re(
      R"(^\s*(?:(?:step\s+\d+|\d+[.)]|\(\d+\))\s*[:.)\-]?\s*|[-*]\s+))", std::regex::icase);
  static const std::regex token_re(R"((</?)(text|context|visual)>|(^|\s)(text|context|visual)\s*:)",
                                   std::regex::icase);
  std::vector<Event> events;
  std::optional<Field> open;
  bool open_tag = false;
  std::string buf;
  auto close = [&] {
    if (open) events.push_back({*open, trim(buf), open_tag});
    open.reset();
    buf.clear();
  };
  auto append = [&](std::string_view text) {
    std::string t = trim(text);
    if (t.empty() || !open) return;
    if (!buf.empty()) buf += ' ';
    buf += t;
  };

  for (const auto& raw_line : lines) {
    if (is_blank(raw_line) || std::regex_match(raw_line, header_re)) {
      close();
      continue;
    }
    std::string line = raw_line;
    std::smatch pm;
    if (std::regex_search(line, pm, prefix_re)) {
      std::string rest = pm.suffix().str();
      std::smatch tm;
      if (std::regex_search(rest, tm, token_re) && tm.position(0) == 0) line = rest;
    }
    std::size_t pos = 0;
    for (auto it = std::sregex_iterator(line.begin(), line.end(), token_re);
         it != std::sregex_iterator(); ++it) {
      const std::smatch& m = *it;
      const bool is_tag = m[2].matched;
      if (!is_tag) {
        // Mid-line labels must be capitalised so prose like "in this context:"
        // is not mistaken for a field; at line start any case is a label.
        const bool line_start = trim(std::string_view(line).substr(0, m.position(0))).empty();
        if (!line_start && !std::isupper(static_cast<unsigned char>(m[4].str()[0]))) continue;
      }
      const std::size_t start = static_cast<std::size_t>(m.position(0)) + (is_tag ? 0 : m[3].length());
      append(std::string_view(line).substr(pos, start - pos));
      pos = static_cast<std::size_t>(m.position(0) + m.length(0));
      if (is_tag && m[1].str() == "</") {
        close();
        continue;
      }
      close();
      open = field_of(is_tag ? m[2].str() : m[4].str());
      open_tag = is_tag;
    }
    append(std::string_view(line).substr(pos));
  }
  close();
  return events;
}

std::string strip_citations(const std::string& sentence, std::vector<std::pair<int, std::pair<double, double>>>& cites) {
  static const std::regex group_re(R"(\s*\(\s*(Video\s+\d+[^)]*)\))", std::regex::icase);
  static const std::regex ref_re(R"(Video\s+(\d+)\s*,?\s*([0-9]+(?:\.[0-9]+)?)\s*-\s*([0-9]+(?:\.[0-9]+)?)\s*s?)",
                                 std::regex::icase);
  for (auto it = std::sregex_iterator(sentence.begin(), sentence.end(), group_re);
       it != std::sregex_iterator(); ++it) {
    const std::string inner = (*it)[1].str();
    for (auto r = std::sregex_iterator(inner.begin(), inner.end(), ref_re);
         r != std::sregex_iterator(); ++r) {
      cites.push_back({std::stoi((*r)[1].str()),
                       {std::stod((*r)[2].str()), std::stod((*r)[3].str())}});
    }
  }
  return trim(std::regex_replace(sentence, group_re, ""));
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::NumberedList:
      return "numbered_list";
    case Strategy::StepPrefix:
      return "step_prefix";
    case Strategy::TaggedTriple:
      return "tagged_triple";
    case Strategy::LabeledTriple:
      return "labeled_triple";
  }
  return "unknown";
}

MissingField::MissingField(std::vector<std::string> fields, std::string raw)
    : Error("MissingField",
            [&] {
              std::string m = "no complete triple; never saw:";
              for (const auto& f : fields) m += " " + f;
              return m;
            }()),
      fields_(std::move(fields)),
      raw_(std::move(raw)) {}

std::string strip_markdown(std::string_view raw) {
  std::string out;
  for (const auto& line : split_lines(raw)) {
    std::string l = line;
    std::size_t hashes = l.find_first_not_of(" \t");
    if (hashes != std::string::npos && l[hashes] == '#') {
      std::size_t end = l.find_first_not_of('#', hashes);
      l = end == std::string::npos ? "" : trim(std::string_view(l).substr(end));
    }
    for (std::string_view marker : {"**", "__", "`"}) {
      for (std::size_t p; (p = l.find(marker)) != std::string::npos;) l.erase(p, marker.size());
    }
    out += l;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::pair<std::string, std::string> split_text_context(std::string_view item) {
  return split_head(trim(item), {});
}

VanillaParse parse_vanilla(std::string_view raw) {
  if (is_blank(raw)) throw UnparsablePlan("empty completion", std::string(raw));
  VanillaParse out;
  const auto lines = split_lines(strip_markdown(raw));
  bool ok = run_list_strategies(lines, out.diagnostics, [&](const Item& item) {
    auto [text, context] = split_head(item.head, item.continuation);
    model::VanillaStep step;
    step.index = static_cast<int>(out.steps.size()) + 1;
    step.text = text;
    step.context = context.empty() ? text : context;
    out.steps.push_back(std::move(step));
  });
  if (!ok) throw UnparsablePlan("no numbered or step-prefixed list found", std::string(raw));
  return out;
}

GroundedParse parse_grounded(std::string_view raw) {
  if (is_blank(raw)) throw UnparsablePlan("empty completion", std::string(raw));
  GroundedParse out;
  auto& diag = out.diagnostics;
  const auto events = scan_fields(split_lines(strip_markdown(raw)));

  std::array<bool, 3> seen{};
  std::array<std::optional<std::string>, 3> partial;
  auto partial_count = [&] {
    return static_cast<int>(std::count_if(partial.begin(), partial.end(),
                                           [](const auto& f) { return f.has_value(); }));
  };
  auto drop_partial = [&] {
    if (partial_count() == 0) return;
    std::string missing;
    for (int f = 0; f < 3; ++f) {
      if (!partial[f]) missing += (missing.empty() ? "" : ", ") + std::string(kFieldNames[f]);
    }
    diag.warnings.push_back("dropped incomplete triple after step " +
                            std::to_string(out.steps.size()) + " (missing " + missing + ")");
    diag.dropped_lines += partial_count();
    partial = {};
  };

  for (const auto& ev : events) {
    seen[ev.field] = true;
    if (ev.content.empty()) {
      diag.warnings.push_back("empty " + std::string(kFieldNames[ev.field]) + " field skipped");
      ++diag.dropped_lines;
      continue;
    }
    if (partial[ev.field]) drop_partial();
    partial[ev.field] = ev.content;
    if (partial_count() == 3) {
      model::GroundedStep step;
      step.index = static_cast<int>(out.steps.size()) + 1;
      step.text = *partial[kText];
      step.context = *partial[kContext];
      step.visual = *partial[kVisual];
      out.steps.push_back(std::move(step));
      partial = {};
    }
  }
  drop_partial();

  if (out.steps.empty()) {
    std::vector<std::string> missing;
    for (int f = 0; f < 3; ++f) {
      if (!seen[f]) missing.emplace_back(kFieldNames[f]);
    }
    if (!missing.empty()) throw MissingField(std::move(missing), std::string(raw));
    throw UnparsablePlan("no complete text/context/visual triple", std::string(raw));
  }
  diag.strategy_used = events.front().from_tag ? Strategy::TaggedTriple : Strategy::LabeledTriple;
  return out;
}

bool has_person_subject(std::string_view sentence) {
  static const std::set<std::string> kDeterminers{"a", "an", "the", "one", "another", "our",
                                                  "two", "some"};
  static const std::set<std::string> kNouns{
      "person", "man",    "woman", "chef",  "cook",   "user",   "individual", "people",
      "hand",   "hands",  "child", "boy",   "girl",   "worker", "mechanic",   "host",
      "baker",  "barista", "cyclist", "presenter", "instructor", "gardener", "crafter"};
  static const std::set<std::string> kPronouns{"someone", "somebody", "he", "she", "they",
                                               "person", "people"};
  std::vector<std::string> words;
  std::string w;
  for (char c : std::string(sentence) + " ") {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '\'') {
      w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!w.empty()) {
      if (w.size() > 2 && w.compare(w.size() - 2, 2, "'s") == 0) w.resize(w.size() - 2);
      words.push_back(w);
      w.clear();
      if (words.size() == 2) break;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      if (!words.empty()) break;
    }
  }
  if (words.empty()) return false;
  if (kPronouns.count(words[0])) return true;
  return words.size() == 2 && kDeterminers.count(words[0]) && kNouns.count(words[1]);
}

FocParse parse_foc(std::string_view raw, std::span<const model::CaptionTrack> tracks) {
  if (is_blank(raw)) throw UnparsablePlan("empty completion", std::string(raw));
  FocParse out;
  auto& diag = out.diagnostics;
  const auto lines = split_lines(strip_markdown(raw));
  bool ok = run_list_strategies(lines, diag, [&](const Item& item) {
    std::vector<std::string> parts{item.head};
    parts.insert(parts.end(), item.continuation.begin(), item.continuation.end());
    std::vector<std::pair<int, std::pair<double, double>>> cites;
    model::FusedStep step;
    step.sentence = strip_citations(join(parts), cites);
    const std::size_t n = out.steps.size() + 1;
    if (!has_person_subject(step.sentence)) {
      diag.warnings.push_back("step " + std::to_string(n) +
                              " does not follow the <person> <verb> <action> shape");
    }
    if (!tracks.empty()) {
      for (const auto& [video, range] : cites) {
        auto track = std::find_if(tracks.begin(), tracks.end(), [&](const auto& t) {
          return t.video_index == video - 1;
        });
        std::optional<int> seg;
        if (track != tracks.end()) {
          for (std::size_t k = 0; k < track->segments.size(); ++k) {
            const auto& s = track->segments[k];
            if (std::abs(s.start_sec - range.first) < 1e-6 &&
                std::abs(s.end_sec - range.second) < 1e-6) {
              seg = static_cast<int>(k);
              break;
            }
          }
        }
        if (seg) {
          step.sources.push_back({video - 1, *seg});
        } else {
          diag.warnings.push_back("step " + std::to_string(n) + " cites Video " +
                                  std::to_string(video) + " at a time no segment covers");
        }
      }
    }
    out.steps.push_back(std::move(step));
  });
  if (!ok) throw UnparsablePlan("no numbered or step-prefixed list found", std::string(raw));
  return out;
}

std::string to_labeled_triples(std::span<const model::GroundedStep> steps) {
  std::string out;
  for (const auto& s : steps) {
    if (!out.empty()) out += '\n';
    out += "Text: " + s.text + "\nContext: " + s.context + "\nVisual: " + s.visual + "\n";
  }
  return out;
}

}  // namespace mmplan::parser
