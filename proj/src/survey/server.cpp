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

#include "mmplan/survey/server.hpp"

#include <httplib.h>

#include <cstdlib>

#include "mmplan/model/json_io.hpp"
#include "mmplan/model/serialize.hpp"

namespace mmplan::survey {
namespace {

using json = nlohmann::json;
namespace json_io = model::json_io;

std::string bearer(const httplib::Request& req) {
  const std::string h = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (h.compare(0, kPrefix.size(), kPrefix) != 0) return {};
  return h.substr(kPrefix.size());
}

int status_for(const std::string& category) {
  static const std::map<std::string, int> kStatus{
      {"Unauthorized", 401},        {"UnknownSubject", 401},    {"NoneAvailable", 404},
      {"UnknownAssignment", 404},   {"DuplicateSubmission", 409}, {"IncompleteAspects", 422},
      {"PreconditionError", 422},   {"SchemaError", 400},       {"PlanUnavailable", 500}};
  auto it = kStatus.find(category);
  return it == kStatus.end() ? 500 : it->second;
}

void reply(httplib::Response& res, int status, json body) {
  body["schema_version"] = std::string(json_io::kSchemaVersion);
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, const std::string& category, const std::string& message) {
  reply(res, status_for(category), json{{"error", category}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  json doc = json_io::parse_text(req.body, "request body");
  json_io::check_schema_version(doc);
  return doc;
}

// Wraps a handler so every library error becomes a JSON error body.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply_error(res, e.category(), e.what());
    } catch (const std::exception& e) {
      reply_error(res, "InternalError", e.what());
    }
  };
}

std::vector<StepView> plan_steps(const model::GoalPlan& plan) {
  std::vector<StepView> out;
  auto add = [&](int index, const std::string& text, const std::string& context) {
    out.push_back({index, text, context, std::nullopt});
  };
  if (auto* g = std::get_if<model::GroundedPlan>(&plan.text_plan)) {
    for (const auto& s : g->steps) add(s.index, s.text, s.context);
  } else {
    for (const auto& s : std::get<model::VanillaTextPlan>(plan.text_plan).steps) {
      add(s.index, s.text, s.context);
    }
  }
  for (const auto& item : plan.video_plan) {
    for (auto& s : out) {
      if (s.index == item.step_index) s.video_uri = item.artifact_uri;
    }
  }
  return out;
}

json to_json(const PlanView& p) {
  json steps = json::array();
  for (const auto& s : p.steps) {
    json step{{"index", s.index}, {"text", s.text}, {"context", s.context}};
    step["video_uri"] = s.video_uri ? json(*s.video_uri) : json(nullptr);
    steps.push_back(std::move(step));
  }
  return json{{"label", p.label}, {"steps", std::move(steps)}};
}

PlanView plan_view_from_json(const json& doc) {
  PlanView p;
  p.label = doc.at("label").get<std::string>();
  for (const auto& s : doc.at("steps")) {
    StepView v{s.at("index").get<int>(), s.at("text").get<std::string>(),
               s.at("context").get<std::string>(), std::nullopt};
    if (s.contains("video_uri") && s["video_uri"].is_string()) {
      v.video_uri = s["video_uri"].get<std::string>();
    }
    p.steps.push_back(std::move(v));
  }
  return p;
}

[[noreturn]] void rethrow(const std::string& category, const std::string& message) {
  if (category == "NoneAvailable") throw NoneAvailable(message);
  if (category == "DuplicateSubmission") throw DuplicateSubmission(message);
  if (category == "IncompleteAspects") throw IncompleteAspects(message);
  if (category == "UnknownAssignment") throw UnknownAssignment(message);
  if (category == "UnknownSubject") throw UnknownSubject(message);
  if (category == "PreconditionError") throw PreconditionError(message);
  throw Error(category, message);
}

}  // namespace

std::string admin_token_from_env() {
  const char* v = std::getenv(kAdminTokenEnv);
  return v == nullptr ? std::string() : std::string(v);
}

json tallies_to_json(const Tallies& tallies) {
  json out = json::object();
  for (const auto& [pairing, aspects] : tallies) {
    for (const auto& [aspect, t] : aspects) {
      out[pairing][std::string(model::to_string(aspect))] = {
          {"win", t.win}, {"tie", t.tie}, {"lose", t.lose}};
    }
  }
  return out;
}

Tallies tallies_from_json(const json& doc) {
  Tallies out;
  for (auto p = doc.begin(); p != doc.end(); ++p) {
    for (auto a = p.value().begin(); a != p.value().end(); ++a) {
      auto aspect = model::parse_aspect(a.key());
      if (!aspect) throw SchemaError("/" + p.key() + "/" + a.key(), "unknown aspect");
      metrics::PreferenceTally t;
      t.aspect = *aspect;
      t.win = a.value().at("win").get<long long>();
      t.tie = a.value().at("tie").get<long long>();
      t.lose = a.value().at("lose").get<long long>();
      out[p.key()][*aspect] = t;
    }
  }
  return out;
}

SurveyServer::SurveyServer(SurveyStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  auto require_admin = [this](const httplib::Request& req) {
    if (options_.admin_token.empty() || bearer(req) != options_.admin_token) {
      throw Error("Unauthorized", "admin token required");
    }
  };
  auto require_subject = [this](const httplib::Request& req) {
    auto id = store_.authenticate(bearer(req));
    if (!id) throw Error("Unauthorized", "subject token required");
    return *id;
  };

  srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, json{{"status", "ok"}});
  });

  srv.Post("/api/subjects", guarded([=, this](const httplib::Request& req, httplib::Response& res) {
    require_admin(req);
    Registration r = store_.register_subject();
    reply(res, 201, json{{"subject_id", r.subject_id}, {"token", r.token}});
  }));

  srv.Post("/api/comparisons",
           guarded([=, this](const httplib::Request& req, httplib::Response& res) {
             require_admin(req);
             json doc = parse_body(req);
             std::vector<Comparison> list;
             for (const auto& c : doc.at("comparisons")) list.push_back(comparison_from_json(c));
             for (const auto& c : list) store_.add_comparison(c);
             reply(res, 200, json{{"added", list.size()}});
           }));

  srv.Get("/api/assignment", guarded([=, this](const httplib::Request& req, httplib::Response& res) {
    const std::string subject = require_subject(req);
    reply(res, 200, assignment_body(store_.next_assignment(subject)));
  }));

  srv.Post("/api/judgments", guarded([=, this](const httplib::Request& req, httplib::Response& res) {
    const std::string subject = require_subject(req);
    json doc = parse_body(req);
    json_io::Reader r;
    const std::string comparison = r.string(doc, "comparison_id", "");
    std::map<model::Aspect, BlindVerdict> verdicts;
    const json& given = r.member(doc, "verdicts", "");
    for (auto it = given.begin(); it != given.end(); ++it) {
      auto aspect = model::parse_aspect(it.key());
      if (!aspect) throw SchemaError("/verdicts/" + it.key(), "unknown aspect");
      auto v = it.value().is_string() ? parse_blind_verdict(it.value().get<std::string>())
                                      : std::nullopt;
      if (!v) throw SchemaError("/verdicts/" + it.key(), "expected left, tie or right");
      verdicts[*aspect] = *v;
    }
    store_.submit(subject, comparison, verdicts);
    reply(res, 200, json{{"accepted", verdicts.size()}});
  }));

  srv.Get("/api/export", guarded([=, this](const httplib::Request& req, httplib::Response& res) {
    require_admin(req);
    TallyFilter filter;
    if (req.has_param("pairing")) filter.pairing = req.get_param_value("pairing");
    if (req.has_param("kind")) {
      auto kind = model::parse_task_kind(req.get_param_value("kind"));
      if (!kind) throw SchemaError("/kind", "expected seen or unseen");
      filter.kind = kind;
    }
    reply(res, 200, json{{"tallies", tallies_to_json(store_.export_tallies(filter))}});
  }));

  if (!options_.static_root.empty()) srv.set_mount_point("/", options_.static_root.string());
}

SurveyServer::~SurveyServer() { stop(); }

json SurveyServer::assignment_body(const Assignment& a) const {
  auto view = [&](const PlanSide& side, std::string label) {
    PlanView p{std::move(label), {}};
    if (options_.plan_root.empty()) return p;
    try {
      auto plan = model::deserialize<model::GoalPlan>(
          json_io::parse_file(options_.plan_root / side.plan_ref));
      p.steps = plan_steps(plan);
    } catch (const Error& e) {
      throw Error("PlanUnavailable", "cannot load plan for " + a.comparison.id + ": " + e.what());
    }
    return p;
  };
  const PlanSide& left = a.a_on_left ? a.comparison.side_a : a.comparison.side_b;
  const PlanSide& right = a.a_on_left ? a.comparison.side_b : a.comparison.side_a;
  return json{{"comparison_id", a.comparison.id},
              {"task_id", a.comparison.task_id},
              {"left", to_json(view(left, "Plan A"))},
              {"right", to_json(view(right, "Plan B"))}};
}

int SurveyServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : port;
  if (port != 0 && !server_->bind_to_port(host, port)) bound = -1;
  if (bound < 0) throw Error("BindError", "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void SurveyServer::serve(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error("BindError", "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void SurveyServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

SurveyClient::SurveyClient(std::string base_url) : base_url_(std::move(base_url)) {}

json SurveyClient::call(const std::string& method, const std::string& path,
                        const std::string& token, const json* body) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(5);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  httplib::Result res;
  if (method == "GET") {
    res = client.Get(path, headers);
  } else {
    json payload = body != nullptr ? *body : json::object();
    payload["schema_version"] = std::string(json_io::kSchemaVersion);
    res = client.Post(path, headers, payload.dump(), "application/json");
  }
  if (!res) {
    throw Error("TransportError", method + " " + base_url_ + path + ": " +
                                      httplib::to_string(res.error()));
  }
  json doc = json_io::parse_text(res->body, base_url_ + path);
  if (res->status >= 400) {
    rethrow(doc.value("error", std::string("HttpError")), doc.value("message", res->body));
  }
  return doc;
}

Registration SurveyClient::register_subject(const std::string& admin_token) {
  json doc = call("POST", "/api/subjects", admin_token, nullptr);
  return {doc.at("subject_id").get<std::string>(), doc.at("token").get<std::string>()};
}

void SurveyClient::add_comparisons(const std::string& admin_token,
                                   const std::vector<Comparison>& comparisons) {
  json body{{"comparisons", json::array()}};
  for (const auto& c : comparisons) body["comparisons"].push_back(to_json(c));
  call("POST", "/api/comparisons", admin_token, &body);
}

AssignmentView SurveyClient::next_assignment(const std::string& subject_token) {
  json doc = call("GET", "/api/assignment", subject_token, nullptr);
  return {doc.at("comparison_id").get<std::string>(), doc.at("task_id").get<std::string>(),
          plan_view_from_json(doc.at("left")), plan_view_from_json(doc.at("right"))};
}

void SurveyClient::submit(const std::string& subject_token, const std::string& comparison_id,
                          const std::map<model::Aspect, BlindVerdict>& verdicts) {
  json body{{"comparison_id", comparison_id}, {"verdicts", json::object()}};
  for (const auto& [aspect, v] : verdicts) {
    body["verdicts"][std::string(model::to_string(aspect))] = std::string(to_string(v));
  }
  call("POST", "/api/judgments", subject_token, &body);
}

Tallies SurveyClient::export_tallies(const std::string& admin_token, const TallyFilter& filter) {
  httplib::Params params;
  if (filter.pairing) params.emplace("pairing", *filter.pairing);
  if (filter.kind) params.emplace("kind", std::string(model::to_string(*filter.kind)));
  std::string path = "/api/export";
  if (!params.empty()) path += "?" + httplib::detail::params_to_query_str(params);
  return tallies_from_json(call("GET", path, admin_token, nullptr).at("tallies"));
}

}  // namespace mmplan::survey
