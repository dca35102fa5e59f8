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
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mmplan/survey/store.hpp"

namespace httplib {
class Server;
}

namespace mmplan::survey {

// Environment variable holding the admin token. It is read at startup and
// never written anywhere.
inline constexpr const char* kAdminTokenEnv = "MMPLAN_SURVEY_ADMIN_TOKEN";
std::string admin_token_from_env();

struct ServerOptions {
  std::string admin_token;           // empty disables the admin endpoints
  std::filesystem::path plan_root;   // resolves Comparison plan_refs; empty omits steps
  std::filesystem::path static_root; // optional UI assets served at "/"
};

// HTTP front end over a SurveyStore:
//   POST /api/subjects       (admin)    register a subject, returns its token once
//   POST /api/comparisons    (admin)    add comparisons
//   GET  /api/assignment     (subject)  next blinded comparison
//   POST /api/judgments      (subject)  four left/tie/right verdicts
//   GET  /api/export         (admin)    de-blinded tallies, ?pairing=&kind=
class SurveyServer {
 public:
  SurveyServer(SurveyStore& store, ServerOptions options);
  ~SurveyServer();
  SurveyServer(const SurveyServer&) = delete;
  SurveyServer& operator=(const SurveyServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks until stop() is called from another thread or a signal handler.
  void serve(const std::string& host, int port);
  void stop();

 private:
  nlohmann::json assignment_body(const Assignment& a) const;

  SurveyStore& store_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

struct StepView {
  int index = 0;
  std::string text;
  std::string context;
  std::optional<std::string> video_uri;
};

struct PlanView {
  std::string label;  // "Plan A" or "Plan B", by screen position only
  std::vector<StepView> steps;
};

struct AssignmentView {
  std::string comparison_id;
  std::string task_id;
  PlanView left;
  PlanView right;
};

// Typed wrapper over the endpoints. Service errors are rethrown as the same
// exception classes the store raises.
class SurveyClient {
 public:
  explicit SurveyClient(std::string base_url);

  Registration register_subject(const std::string& admin_token);
  void add_comparisons(const std::string& admin_token, const std::vector<Comparison>& comparisons);
  AssignmentView next_assignment(const std::string& subject_token);
  void submit(const std::string& subject_token, const std::string& comparison_id,
              const std::map<model::Aspect, BlindVerdict>& verdicts);
  Tallies export_tallies(const std::string& admin_token, const TallyFilter& filter = {});

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const std::string& token,
                      const nlohmann::json* body);

  std::string base_url_;
};

nlohmann::json tallies_to_json(const Tallies& tallies);
Tallies tallies_from_json(const nlohmann::json& doc);

}  // namespace mmplan::survey
