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

#include "mmplan/gateway/http_backends.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <httplib.h>

#include "mmplan/gateway/errors.hpp"

namespace mmplan::gateway {
namespace {

using json = nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  auto path_start =
      endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  SplitUrl out;
  out.origin = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = endpoint.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

bool mentions_context_window(std::string body) {
  std::transform(body.begin(), body.end(), body.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return body.find("context") != std::string::npos &&
         (body.find("length") != std::string::npos || body.find("window") != std::string::npos ||
          body.find("exceed") != std::string::npos || body.find("n_ctx") != std::string::npos);
}

}  // namespace

json http_json(const HttpOptions& options, const std::string& method, const std::string& path,
               const json* body) {
  const SplitUrl url = split_url(options.endpoint);
  httplib::Client client(url.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  httplib::Headers headers;
  if (!options.auth_env.empty()) {
    if (const char* token = std::getenv(options.auth_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const std::string full_path = url.prefix + path;
  httplib::Result res = method == "GET"
                            ? client.Get(full_path, headers)
                            : client.Post(full_path, headers, body ? body->dump() : "{}",
                                          "application/json");
  if (!res) {
    throw TransportError(method + " " + options.endpoint + path + ": " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError(method + " " + path + " returned " + std::to_string(res->status));
  }
  if (res->status >= 400 && mentions_context_window(res->body)) {
    throw ContextOverflow("prompt exceeds the backend context window: " + res->body);
  }
  if (res->status == 404 && method == "GET") throw UnknownJob(path);
  if (res->status < 200 || res->status >= 300) {
    throw BackendRefused(method + " " + path + " returned " + std::to_string(res->status),
                         res->body);
  }
  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw BackendRefused("response is not JSON", res->body);
  doc["__raw"] = res->body;
  return doc;
}

std::string HttpChat::complete(const ChatRequest& request) {
  const auto& p = request.params;
  json body = {
      {"model", request.model_id},
      {"messages", json::array({{{"role", "system"}, {"content", request.system_prompt}},
                                {{"role", "user"}, {"content", request.user_prompt}}})},
      {"temperature", p.temperature},
      {"top_k", p.top_k},
      {"top_p", p.top_p},
      {"min_p", p.min_p},
      {"stream", false},
  };
  json doc = http_json(options_, "POST", "/v1/chat/completions", &body);
  const std::string raw = doc["__raw"].get<std::string>();
  const json* content = nullptr;
  if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
    const json& first = doc["choices"][0];
    if (first.contains("message") && first["message"].contains("content")) {
      content = &first["message"]["content"];
    }
  }
  if (content == nullptr || !content->is_string()) {
    throw BackendRefused("malformed chat envelope", raw);
  }
  return content->get<std::string>();
}

model::CaptionTrack HttpCaptioner::caption(const CaptionRequest& request) {
  json modalities = json::array();
  for (auto m : request.modalities) {
    modalities.push_back(m == Modality::Image ? "image" : m == Modality::Region ? "region" : "audio");
  }
  json body = {{"uri", request.video_uri}, {"modalities", modalities}};
  json doc = http_json(options_, "POST", "/caption", &body);
  model::CaptionTrack track;
  track.video_index = request.video_index;
  try {
    for (const auto& s : doc.at("segments")) {
      track.segments.push_back({request.video_index, s.at("start_sec").get<double>(),
                                s.at("end_sec").get<double>(), s.at("text").get<std::string>()});
    }
  } catch (const json::exception&) {
    throw BackendRefused("malformed caption envelope", doc["__raw"].get<std::string>());
  }
  return track;
}

void HttpVideoGenerator::submit(const std::string& job_id, const VideoJobRequest& request) {
  json body = {{"job_id", job_id},
               {"prompt", request.prompt},
               {"duration_sec", request.duration_sec},
               {"seed", request.seed}};
  http_json(options_, "POST", "/jobs", &body);
}

VideoJobStatus HttpVideoGenerator::poll(const std::string& job_id) {
  json doc;
  try {
    doc = http_json(options_, "GET", "/jobs/" + job_id, nullptr);
  } catch (const UnknownJob&) {
    throw UnknownJob(job_id);
  }
  VideoJobStatus s;
  s.job_id = job_id;
  auto status = model::parse_job_status(doc.value("status", ""));
  if (!status) throw BackendRefused("malformed job status", doc["__raw"].get<std::string>());
  s.status = *status;
  if (doc.contains("artifact_uri") && doc["artifact_uri"].is_string()) {
    s.artifact_uri = doc["artifact_uri"].get<std::string>();
  }
  if (doc.contains("error") && doc["error"].is_string()) s.error = doc["error"].get<std::string>();
  return s;
}

double HttpScorer::score(const SimilarityRequest& request) {
  json body = {{"image", request.image_ref}, {"text", request.text}};
  json doc = http_json(options_, "POST", "/similarity", &body);
  if (!doc.contains("score") || !doc["score"].is_number()) {
    throw BackendRefused("malformed similarity envelope", doc["__raw"].get<std::string>());
  }
  return doc["score"].get<double>();
}

}  // namespace mmplan::gateway
