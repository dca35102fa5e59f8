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

#include "mmplan/survey/store.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "mmplan/model/digest.hpp"
#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"

namespace mmplan::survey {
namespace {

using json = nlohmann::json;
namespace json_io = model::json_io;

constexpr std::string_view kLogName = "events.jsonl";
constexpr std::string_view kSnapshotName = "snapshot.json";

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string random_token() {
  unsigned char bytes[24];
  if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error("TokenError", "RAND_bytes failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out += kHex[b >> 4];
    out += kHex[b & 15];
  }
  return out;
}

}  // namespace

json to_json(const Comparison& c) {
  return json{{"id", c.id},
              {"task_id", c.task_id},
              {"task_kind", model::to_string(c.task_kind)},
              {"pairing", c.pairing},
              {"side_a", {{"label", c.side_a.label}, {"plan_ref", c.side_a.plan_ref}}},
              {"side_b", {{"label", c.side_b.label}, {"plan_ref", c.side_b.plan_ref}}}};
}

Comparison comparison_from_json(const json& doc) {
  json_io::Reader r;
  r.object(doc, "");
  Comparison c;
  c.id = r.string(doc, "id", "");
  c.task_id = r.string(doc, "task_id", "");
  const std::string kind = r.string(doc, "task_kind", "");
  auto parsed = model::parse_task_kind(kind);
  if (!parsed) throw SchemaError("/task_kind", "unknown task kind \"" + kind + "\"");
  c.task_kind = *parsed;
  c.pairing = r.string(doc, "pairing", "");
  for (auto [key, side] : {std::pair{"side_a", &c.side_a}, std::pair{"side_b", &c.side_b}}) {
    const json& s = r.member(doc, key, "");
    const std::string path = json_io::Reader::child("", key);
    side->label = r.string(s, "label", path);
    side->plan_ref = r.string(s, "plan_ref", path);
  }
  return c;
}

std::string_view to_string(BlindVerdict v) {
  switch (v) {
    case BlindVerdict::Left:
      return "left";
    case BlindVerdict::Tie:
      return "tie";
    case BlindVerdict::Right:
      return "right";
  }
  return "tie";
}

std::optional<BlindVerdict> parse_blind_verdict(std::string_view s) {
  if (s == "left") return BlindVerdict::Left;
  if (s == "tie") return BlindVerdict::Tie;
  if (s == "right") return BlindVerdict::Right;
  return std::nullopt;
}

bool a_on_left(std::uint64_t seed, std::string_view subject, std::string_view comparison) {
  std::string key = std::to_string(seed);
  key += '\x1f';
  key += subject;
  key += '\x1f';
  key += comparison;
  return (model::sha256_u64(key) & 1U) == 0;
}

model::Verdict deblind(BlindVerdict v, bool a_left) {
  if (v == BlindVerdict::Tie) return model::Verdict::Tie;
  const bool left = v == BlindVerdict::Left;
  return left == a_left ? model::Verdict::WinA : model::Verdict::WinB;
}

SurveyStore::SurveyStore(std::filesystem::path dir, std::uint64_t blinding_seed,
                         std::function<std::string()> clock)
    : dir_(std::move(dir)), seed_(blinding_seed), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_now;
  if (dir_.empty()) return;
  std::filesystem::create_directories(dir_);
  std::ifstream in(dir_ / kLogName);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json event;
    try {
      event = json::parse(line);
    } catch (const json::parse_error&) {
      // A torn final line means the append never completed; anything else is corruption.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw SchemaError("/" + std::string(kLogName) + "/" + std::to_string(line_no),
                        "unparsable event");
    }
    apply(event);
  }
}

void SurveyStore::apply(const json& event) {
  const std::string type = event.at("type").get<std::string>();
  if (type == "subject") {
    subjects_[event.at("subject_id").get<std::string>()].token_digest =
        event.at("token_sha256").get<std::string>();
  } else if (type == "comparison") {
    Comparison c = comparison_from_json(event.at("comparison"));
    comparisons_[c.id] = std::move(c);
  } else if (type == "issue") {
    subjects_.at(event.at("subject_id").get<std::string>())
        .issued.insert(event.at("comparison_id").get<std::string>());
  } else if (type == "submit") {
    const std::string subject = event.at("subject_id").get<std::string>();
    const std::string comparison = event.at("comparison_id").get<std::string>();
    auto& s = subjects_.at(subject);
    s.submitted.insert(comparison);
    s.seen_tasks.insert(comparisons_.at(comparison).task_id);
    judged_[comparison]++;
    for (const auto& j : event.at("judgments")) {
      judgments_.push_back(model::deserialize<model::Judgment>(j));
    }
  } else {
    throw SchemaError("/type", "unknown event type \"" + type + "\"");
  }
}

void SurveyStore::append(const json& event) {
  if (!dir_.empty()) {
    std::ofstream out(dir_ / kLogName, std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error("IoError", "cannot append to " + (dir_ / kLogName).string());
  }
  apply(event);
  if (!dir_.empty()) json_io::write_atomic(dir_ / kSnapshotName, json_io::dump(snapshot_locked()));
}

std::mutex& SurveyStore::subject_mutex(const std::string& subject_id) {
  std::lock_guard lock(locks_mu_);
  auto& slot = subject_locks_[subject_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

Registration SurveyStore::register_subject() {
  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof id, "subject-%03zu", subjects_.size() + 1);
  Registration reg{id, random_token()};
  append(json{{"type", "subject"},
              {"subject_id", reg.subject_id},
              {"token_sha256", model::sha256_hex(reg.token)}});
  return reg;
}

void SurveyStore::add_comparison(const Comparison& c) {
  if (c.id.empty() || c.task_id.empty()) throw PreconditionError("comparison needs id and task_id");
  if (c.side_a.label == c.side_b.label) {
    throw PreconditionError("comparison " + c.id + " pits \"" + c.side_a.label +
                            "\" against itself");
  }
  std::lock_guard lock(mu_);
  auto it = comparisons_.find(c.id);
  if (it != comparisons_.end()) {
    if (it->second == c) return;
    throw PreconditionError("comparison " + c.id + " already exists with different sides");
  }
  append(json{{"type", "comparison"}, {"comparison", to_json(c)}});
}

std::vector<Comparison> SurveyStore::comparisons() const {
  std::lock_guard lock(mu_);
  std::vector<Comparison> out;
  for (const auto& [id, c] : comparisons_) out.push_back(c);
  return out;
}

std::optional<std::string> SurveyStore::authenticate(std::string_view token) const {
  if (token.empty()) return std::nullopt;
  const std::string digest = model::sha256_hex(token);
  std::lock_guard lock(mu_);
  for (const auto& [id, s] : subjects_) {
    if (s.token_digest == digest) return id;
  }
  return std::nullopt;
}

Assignment SurveyStore::next_assignment(const std::string& subject_id) {
  std::lock_guard subject_lock(subject_mutex(subject_id));
  std::lock_guard lock(mu_);
  auto sit = subjects_.find(subject_id);
  if (sit == subjects_.end()) throw UnknownSubject("unknown subject " + subject_id);
  const SubjectState& s = sit->second;

  // An outstanding assignment is handed out again so a reload shows the same pair.
  for (const auto& id : s.issued) {
    if (s.submitted.count(id) || s.seen_tasks.count(comparisons_.at(id).task_id)) continue;
    return {comparisons_.at(id), a_on_left(seed_, subject_id, id)};
  }

  const Comparison* best = nullptr;
  int best_count = 0;
  for (const auto& [id, c] : comparisons_) {
    if (s.seen_tasks.count(c.task_id) || s.submitted.count(id)) continue;
    auto jit = judged_.find(id);
    int count = jit == judged_.end() ? 0 : jit->second;
    if (best == nullptr || count < best_count) best = &c, best_count = count;
  }
  if (best == nullptr) throw NoneAvailable("no unseen comparison left for " + subject_id);
  Assignment out{*best, a_on_left(seed_, subject_id, best->id)};
  append(json{{"type", "issue"}, {"subject_id", subject_id}, {"comparison_id", best->id}});
  return out;
}

void SurveyStore::submit(const std::string& subject_id, const std::string& comparison_id,
                         const std::map<model::Aspect, BlindVerdict>& verdicts) {
  std::lock_guard subject_lock(subject_mutex(subject_id));
  std::lock_guard lock(mu_);
  auto sit = subjects_.find(subject_id);
  if (sit == subjects_.end()) throw UnknownSubject("unknown subject " + subject_id);
  const SubjectState& s = sit->second;
  if (!s.issued.count(comparison_id)) {
    throw UnknownAssignment("comparison " + comparison_id + " was not issued to " + subject_id);
  }
  if (s.submitted.count(comparison_id)) {
    throw DuplicateSubmission(subject_id + " already judged " + comparison_id);
  }
  const Comparison& c = comparisons_.at(comparison_id);
  if (s.seen_tasks.count(c.task_id)) {
    throw DuplicateSubmission(subject_id + " already judged task " + c.task_id);
  }
  std::string missing;
  for (auto aspect : model::kAllAspects) {
    if (!verdicts.count(aspect)) missing += (missing.empty() ? "" : ", ") + std::string(model::to_string(aspect));
  }
  if (!missing.empty()) throw IncompleteAspects("missing verdicts for " + missing);

  const bool a_left = a_on_left(seed_, subject_id, comparison_id);
  const std::string now = clock_();
  json judgments = json::array();
  for (auto aspect : model::kAllAspects) {
    model::Judgment j{subject_id, comparison_id, aspect, deblind(verdicts.at(aspect), a_left), now};
    judgments.push_back(model::serialize(j));
  }
  append(json{{"type", "submit"},
              {"subject_id", subject_id},
              {"comparison_id", comparison_id},
              {"judgments", std::move(judgments)}});
}

std::vector<model::Judgment> SurveyStore::judgments() const {
  std::lock_guard lock(mu_);
  return judgments_;
}

std::set<std::string> SurveyStore::seen_tasks(const std::string& subject_id) const {
  std::lock_guard lock(mu_);
  auto it = subjects_.find(subject_id);
  if (it == subjects_.end()) throw UnknownSubject("unknown subject " + subject_id);
  return it->second.seen_tasks;
}

int SurveyStore::judged_count(const std::string& comparison_id) const {
  std::lock_guard lock(mu_);
  auto it = judged_.find(comparison_id);
  return it == judged_.end() ? 0 : it->second;
}

Tallies SurveyStore::export_tallies(const TallyFilter& filter) const {
  std::lock_guard lock(mu_);
  Tallies out;
  for (const auto& j : judgments_) {
    const Comparison& c = comparisons_.at(j.comparison_id);
    if (filter.pairing && c.pairing != *filter.pairing) continue;
    if (filter.kind && c.task_kind != *filter.kind) continue;
    auto& tally = out[c.pairing][j.aspect];
    tally.aspect = j.aspect;
    switch (j.verdict) {
      case model::Verdict::WinA:
        tally.win++;
        break;
      case model::Verdict::Tie:
        tally.tie++;
        break;
      case model::Verdict::WinB:
        tally.lose++;
        break;
    }
  }
  return out;
}

json SurveyStore::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_locked();
}

json SurveyStore::snapshot_locked() const {
  json subjects = json::object();
  for (const auto& [id, s] : subjects_) {
    subjects[id] = {{"seen_task_ids", s.seen_tasks}, {"judged_comparisons", s.submitted}};
  }
  json counts = json::object();
  for (const auto& [id, c] : comparisons_) {
    auto it = judged_.find(id);
    counts[id] = it == judged_.end() ? 0 : it->second;
  }
  return json{{"schema_version", std::string(json_io::kSchemaVersion)},
              {"subjects", std::move(subjects)},
              {"judged_per_comparison", std::move(counts)},
              {"judgment_count", judgments_.size()}};
}

}  // namespace mmplan::survey
