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

#include "mmplan/dataset/dailypp.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"

namespace mmplan::embedded {
std::string_view reference_manifest_json();
std::string_view stopwords_txt();
std::string_view verbs_txt();
}  // namespace mmplan::embedded

namespace mmplan::dataset {
namespace {

using model::Domain;
using model::TaskKind;
using model::TaskSpec;
namespace code = model::code;

constexpr int kDomainCount = 5;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void count_tokens(const Lexicon& lex, std::string_view text, TokenClass cls,
                  std::unordered_map<std::string, long long>& counts) {
  for (auto& tok : lex.tokenize(text)) {
    if (cls == TokenClass::ActionVerb && !lex.is_verb(tok)) continue;
    ++counts[tok];
  }
}

bool wants(Scope scope, Scope field) { return scope == Scope::All || scope == field; }

}  // namespace

std::string ManifestCounts::summary() const {
  return std::to_string(seen) + " seen, " + std::to_string(unseen) + " unseen";
}

const TaskSpec* Manifest::find(std::string_view id) const {
  for (const auto& t : tasks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

ManifestCounts Manifest::counts() const {
  ManifestCounts c;
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::Seen) {
      ++c.seen;
      ++c.seen_per_domain[t.domain];
    } else {
      ++c.unseen;
      ++c.unseen_per_domain[t.domain];
    }
  }
  return c;
}

model::ValidationReport check_manifest(const Manifest& m, const model::ValidationOptions& options) {
  model::ValidationReport r;
  std::set<Domain> domains(m.domains.begin(), m.domains.end());
  if (m.domains.size() != kDomainCount || domains.size() != kDomainCount) {
    r.add(code::kDomainSet, "/domains",
          "expected 5 distinct domains, got " + std::to_string(m.domains.size()));
  }
  std::unordered_map<std::string, const TaskSpec*> by_id;
  for (std::size_t i = 0; i < m.tasks.size(); ++i) {
    const TaskSpec& t = m.tasks[i];
    const std::string path = "/tasks/" + std::to_string(i);
    auto task_report = model::validate(t, options);
    for (auto v : task_report.violations) r.add(v.code, path + v.path, v.message);
    if (!domains.count(t.domain)) {
      r.add(code::kDomainSet, path + "/domain",
            std::string(model::to_string(t.domain)) + " is not a manifest domain");
    }
    if (!by_id.emplace(t.id, &t).second) {
      r.add(code::kDuplicateId, path + "/id", "duplicate task id " + t.id);
    }
  }
  for (std::size_t i = 0; i < m.tasks.size(); ++i) {
    const TaskSpec& t = m.tasks[i];
    for (std::size_t k = 0; k < t.related_seen.size(); ++k) {
      const std::string path = "/tasks/" + std::to_string(i) + "/related_seen/" + std::to_string(k);
      auto it = by_id.find(t.related_seen[k]);
      if (it == by_id.end()) {
        r.add(code::kDanglingRelated, path, "no task with id " + t.related_seen[k]);
      } else if (it->second->kind != TaskKind::Seen) {
        r.add(code::kRelatedNotSeen, path, t.related_seen[k] + " is not a seen task");
      }
    }
  }
  return r;
}

Manifest parse_manifest(const nlohmann::json& doc, std::vector<std::string>* warnings,
                        const model::ValidationOptions& options) {
  model::json_io::Reader reader(warnings);
  reader.object(doc, "");
  reader.check_known(doc, {"version", "domains", "tasks"}, "");
  Manifest m;
  m.version = reader.string(doc, "version", "");
  auto names = reader.strings(doc, "domains", "");
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto d = model::parse_domain(names[i]);
    if (!d) throw SchemaError("/domains/" + std::to_string(i), "unknown domain " + names[i]);
    m.domains.push_back(*d);
  }
  const auto& tasks = reader.array(doc, "tasks", "");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskSpec t;
    model::from_value(tasks[i], model::json_io::Reader::child("/tasks", i), reader, t);
    m.tasks.push_back(std::move(t));
  }
  auto report = check_manifest(m, options);
  if (!report.ok()) throw IntegrityError(std::move(report));
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, std::vector<std::string>* warnings,
                       const model::ValidationOptions& options) {
  return parse_manifest(model::json_io::parse_file(path), warnings, options);
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json doc;
  doc["version"] = m.version;
  doc["domains"] = nlohmann::json::array();
  for (auto d : m.domains) doc["domains"].push_back(std::string(model::to_string(d)));
  doc["tasks"] = nlohmann::json::array();
  for (const auto& t : m.tasks) doc["tasks"].push_back(model::to_value(t));
  return doc;
}

const Manifest& reference_manifest() {
  static const Manifest kManifest = parse_manifest(
      model::json_io::parse_text(embedded::reference_manifest_json(), "manifest.json"));
  return kManifest;
}

std::vector<CaptionSource> resolve_caption_sources(const TaskSpec& task, const Manifest& manifest) {
  if (task.kind != TaskKind::Unseen) {
    throw PreconditionError("resolve_caption_sources needs an unseen task, got seen task " +
                            task.id);
  }
  model::ValidationReport missing;
  for (const auto& id : task.related_seen) {
    const TaskSpec* related = manifest.find(id);
    if (related == nullptr) {
      missing.add(code::kDanglingRelated, "/related_seen", "no task with id " + id);
    } else if (related->kind != TaskKind::Seen) {
      missing.add(code::kRelatedNotSeen, "/related_seen", id + " is not a seen task");
    }
  }
  if (!missing.ok()) throw IntegrityError(std::move(missing));
  std::vector<CaptionSource> out;
  for (const auto& t : manifest.tasks) {
    if (std::find(task.related_seen.begin(), task.related_seen.end(), t.id) !=
        task.related_seen.end()) {
      out.push_back({t.id, t.video_refs});
    }
  }
  return out;
}

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::Text:
      return "text";
    case Scope::Context:
      return "context";
    case Scope::Visual:
      return "visual";
    case Scope::All:
      return "all";
  }
  return "all";
}

std::string_view to_string(TokenClass c) {
  return c == TokenClass::Word ? "word" : "action_verb";
}

std::optional<Scope> parse_scope(std::string_view s) {
  for (auto v : {Scope::Text, Scope::Context, Scope::Visual, Scope::All}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<TokenClass> parse_token_class(std::string_view s) {
  if (s == "word") return TokenClass::Word;
  if (s == "action_verb" || s == "verb") return TokenClass::ActionVerb;
  return std::nullopt;
}

Lexicon::Lexicon(std::unordered_set<std::string> stopwords, std::unordered_set<std::string> verbs)
    : stopwords_(std::move(stopwords)), verbs_(std::move(verbs)) {}

std::unordered_set<std::string> Lexicon::parse_word_list(std::string_view text) {
  std::unordered_set<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string word = line.substr(b, e - b + 1);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.insert(std::move(word));
  }
  return out;
}

const Lexicon& Lexicon::shipped() {
  static const Lexicon kLexicon(parse_word_list(embedded::stopwords_txt()),
                                parse_word_list(embedded::verbs_txt()));
  return kLexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& stopwords, const std::filesystem::path& verbs) {
  return Lexicon(parse_word_list(read_file(stopwords)), parse_word_list(read_file(verbs)));
}

bool Lexicon::is_stopword(std::string_view token) const {
  return stopwords_.count(std::string(token)) > 0;
}

bool Lexicon::is_verb(std::string_view token) const {
  auto listed = [&](std::string_view s) { return !s.empty() && verbs_.count(std::string(s)) > 0; };
  if (listed(token)) return true;
  auto ends = [&](std::string_view suffix) {
    return token.size() > suffix.size() + 1 && token.substr(token.size() - suffix.size()) == suffix;
  };
  auto base_candidates = [&](std::string_view stem) {
    if (listed(stem) || listed(std::string(stem) + "e")) return true;
    // stopped -> stop, chopping -> chop
    return stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
           listed(stem.substr(0, stem.size() - 1));
  };
  if (ends("ing") && base_candidates(token.substr(0, token.size() - 3))) return true;
  if (ends("ied") && listed(std::string(token.substr(0, token.size() - 3)) + "y")) return true;
  if (ends("ies") && listed(std::string(token.substr(0, token.size() - 3)) + "y")) return true;
  if (ends("ed") && base_candidates(token.substr(0, token.size() - 2))) return true;
  if (ends("es") && listed(token.substr(0, token.size() - 2))) return true;
  if (ends("s") && listed(token.substr(0, token.size() - 1))) return true;
  return false;
}

std::vector<std::string> Lexicon::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !is_stopword(cur)) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

FrequencyTable corpus_stats(std::span<const model::TextPlan> plans, Scope scope,
                            TokenClass token_class, int top_k, const Lexicon& lexicon) {
  if (top_k < 1) throw PreconditionError("top_k must be >= 1");
  std::unordered_map<std::string, long long> counts;
  for (const auto& plan : plans) {
    if (const auto* g = std::get_if<model::GroundedPlan>(&plan)) {
      for (const auto& s : g->steps) {
        if (wants(scope, Scope::Text)) count_tokens(lexicon, s.text, token_class, counts);
        if (wants(scope, Scope::Context)) count_tokens(lexicon, s.context, token_class, counts);
        if (wants(scope, Scope::Visual)) count_tokens(lexicon, s.visual, token_class, counts);
      }
    } else {
      for (const auto& s : std::get<model::VanillaTextPlan>(plan).steps) {
        if (wants(scope, Scope::Text)) count_tokens(lexicon, s.text, token_class, counts);
        if (wants(scope, Scope::Context)) count_tokens(lexicon, s.context, token_class, counts);
      }
    }
  }
  FrequencyTable table;
  table.scope = scope;
  table.token_class = token_class;
  table.entries.reserve(counts.size());
  for (auto& [tok, n] : counts) table.entries.push_back({tok, n});
  std::sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) {
    return a.count != b.count ? a.count > b.count : a.token < b.token;
  });
  if (table.entries.size() > static_cast<std::size_t>(top_k)) table.entries.resize(top_k);
  return table;
}

std::string to_csv(const FrequencyTable& table) {
  std::string out = "token,count\n";
  for (const auto& e : table.entries) out += e.token + "," + std::to_string(e.count) + "\n";
  return out;
}

}  // namespace mmplan::dataset
