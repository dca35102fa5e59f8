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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mmplan/model/errors.hpp"
#include "mmplan/model/types.hpp"
#include "mmplan/model/validate.hpp"

namespace mmplan::dataset {

// Referential problems in a manifest. The report lists every violation found.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(model::ValidationReport report)
      : Error("IntegrityError", report.summary()), report_(std::move(report)) {}

  const model::ValidationReport& report() const noexcept { return report_; }

 private:
  model::ValidationReport report_;
};

struct ManifestCounts {
  int seen = 0;
  int unseen = 0;
  std::map<model::Domain, int> seen_per_domain;
  std::map<model::Domain, int> unseen_per_domain;

  std::string summary() const;  // "50 seen, 15 unseen"
};

struct Manifest {
  std::string version;
  std::vector<model::Domain> domains;
  std::vector<model::TaskSpec> tasks;

  const model::TaskSpec* find(std::string_view id) const;
  ManifestCounts counts() const;
};

// Pure check over an already parsed manifest; returns every violation.
model::ValidationReport check_manifest(const Manifest& m,
                                       const model::ValidationOptions& options = {});

Manifest parse_manifest(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr,
                        const model::ValidationOptions& options = {});
Manifest load_manifest(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr,
                       const model::ValidationOptions& options = {});
nlohmann::json to_json(const Manifest& m);

// Reference manifest compiled into the library (placeholder uris).
const Manifest& reference_manifest();

struct CaptionSource {
  std::string task_id;
  std::vector<model::VideoRef> video_refs;

  bool operator==(const CaptionSource&) const = default;
};

// The two related seen tasks of an unseen task, in manifest order.
std::vector<CaptionSource> resolve_caption_sources(const model::TaskSpec& task,
                                                   const Manifest& manifest);

enum class Scope { Text, Context, Visual, All };
enum class TokenClass { Word, ActionVerb };

std::string_view to_string(Scope s);
std::string_view to_string(TokenClass c);
std::optional<Scope> parse_scope(std::string_view s);
std::optional<TokenClass> parse_token_class(std::string_view s);

struct FrequencyEntry {
  std::string token;
  long long count = 0;

  bool operator==(const FrequencyEntry&) const = default;
};

struct FrequencyTable {
  Scope scope = Scope::All;
  TokenClass token_class = TokenClass::Word;
  std::vector<FrequencyEntry> entries;  // count desc, token asc
};

class Lexicon {
 public:
  Lexicon(std::unordered_set<std::string> stopwords, std::unordered_set<std::string> verbs);

  static const Lexicon& shipped();
  static Lexicon load(const std::filesystem::path& stopwords, const std::filesystem::path& verbs);
  static std::unordered_set<std::string> parse_word_list(std::string_view text);

  bool is_stopword(std::string_view token) const;
  // Exact match or a regular inflection of a listed base form.
  bool is_verb(std::string_view token) const;

  // Lowercase, split on non-alphanumerics, drop stopwords.
  std::vector<std::string> tokenize(std::string_view text) const;

 private:
  std::unordered_set<std::string> stopwords_;
  std::unordered_set<std::string> verbs_;
};

FrequencyTable corpus_stats(std::span<const model::TextPlan> plans, Scope scope,
                            TokenClass token_class, int top_k,
                            const Lexicon& lexicon = Lexicon::shipped());

std::string to_csv(const FrequencyTable& table);

}  // namespace mmplan::dataset
