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

#include "mmplan/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mmplan/gateway/errors.hpp"
#include "mmplan/gateway/sidecar.hpp"
#include "mmplan/model/digest.hpp"
#include "mmplan/model/serialize.hpp"
#include "mmplan/model/validate.hpp"

namespace mmplan::gateway {
namespace {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::Image:
      return "image";
    case Modality::Region:
      return "region";
    case Modality::Audio:
      return "audio";
  }
  return "unknown";
}

json status_to_json(const VideoJobStatus& s) {
  json j = {{"job_id", s.job_id}, {"status", model::to_string(s.status)}};
  if (s.artifact_uri) j["artifact_uri"] = *s.artifact_uri;
  if (s.error) j["error"] = *s.error;
  return j;
}

VideoJobStatus status_from_json(const json& j) {
  VideoJobStatus s;
  s.job_id = j.at("job_id").get<std::string>();
  s.status = model::parse_job_status(j.at("status").get<std::string>()).value();
  if (j.contains("artifact_uri")) s.artifact_uri = j["artifact_uri"].get<std::string>();
  if (j.contains("error")) s.error = j["error"].get<std::string>();
  return s;
}

}  // namespace

Gateway::Gateway(std::shared_ptr<ResponseCache> cache) : cache_(std::move(cache)) {
  retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Gateway::add_chat(const std::string& model_id, std::shared_ptr<ChatBackend> backend) {
  chat_[model_id] = std::move(backend);
}

void Gateway::set_captioner(std::shared_ptr<Captioner> captioner) {
  captioner_ = std::move(captioner);
}

void Gateway::set_sidecar_dir(std::filesystem::path dir) { sidecar_dir_ = std::move(dir); }

void Gateway::set_video_generator(std::shared_ptr<VideoGenerator> generator) {
  generator_ = std::move(generator);
}

void Gateway::set_scorer(std::shared_ptr<SimilarityScorer> scorer) { scorer_ = std::move(scorer); }

void Gateway::set_retry(RetryPolicy policy) {
  if (!policy.sleep) policy.sleep = retry_.sleep;
  retry_ = std::move(policy);
}

bool Gateway::has_model(const std::string& model_id) const { return chat_.count(model_id) > 0; }

std::string Gateway::chat_backend_id(const std::string& model_id) const {
  auto it = chat_.find(model_id);
  if (it == chat_.end()) throw UnknownModel(model_id);
  return it->second->id();
}

std::vector<std::string> Gateway::models() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : chat_) out.push_back(id);
  return out;
}

template <class Fn, class MakeError>
auto Gateway::with_retry(Fn&& fn, MakeError&& make_error) -> decltype(fn()) {
  std::string last;
  const int attempts = std::max(1, retry_.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      return fn();
    } catch (const TransportError& e) {
      last = e.what();
      if (attempt < attempts) retry_.sleep(retry_.base_delay * (1 << (attempt - 1)));
    }
  }
  throw make_error("gave up after " + std::to_string(attempts) + " attempts: " + last);
}

void Gateway::record_call(std::string entry) {
  std::lock_guard lock(mu_);
  stats_.backend_calls.push_back(std::move(entry));
}

void Gateway::record_hit(bool hit) {
  std::lock_guard lock(mu_);
  (hit ? stats_.cache_hits : stats_.cache_misses)++;
}

void Gateway::warn(std::string message) {
  std::lock_guard lock(mu_);
  stats_.warnings.push_back(std::move(message));
}

ChatResponse Gateway::chat(const ChatRequest& request) {
  auto it = chat_.find(request.model_id);
  if (it == chat_.end()) throw UnknownModel(request.model_id);
  if (request.user_prompt.empty() || request.system_prompt.empty()) {
    throw PreconditionError("chat prompts must be nonempty");
  }
  if (auto report = model::validate(request.params); !report.ok()) {
    throw PreconditionError("invalid inference params: " + report.summary());
  }
  ChatBackend& backend = *it->second;
  const std::string backend_id = backend.id();
  const std::string key =
      cache_key("chat", backend_id, request.model_id, &request.params,
                json{{"system", request.system_prompt}, {"user", request.user_prompt}},
                request.template_version);

  if (auto hit = cache_->get(key)) {
    record_hit(true);
    ChatResponse r;
    r.text = hit->at("text").get<std::string>();
    r.backend_id = hit->at("backend_id").get<std::string>();
    r.latency_ms = hit->value("latency_ms", 0.0);
    r.cached = true;
    return r;
  }
  record_hit(false);

  const auto start = std::chrono::steady_clock::now();
  std::string text = with_retry(
      [&] {
        record_call("chat:" + key);
        return backend.complete(request);
      },
      [](const std::string& m) { return BackendUnavailable(m); });
  const double latency =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  cache_->put(key, json{{"text", text}, {"backend_id", backend_id}, {"latency_ms", latency}});
  // Another worker may have won the race; return whatever is stored so every
  // caller sees one answer per key.
  ChatResponse r;
  auto stored = cache_->get(key);
  r.text = stored ? stored->at("text").get<std::string>() : std::move(text);
  r.backend_id = backend_id;
  r.latency_ms = latency;
  r.cached = false;
  return r;
}

model::CaptionTrack Gateway::caption(const CaptionRequest& request) {
  if (sidecar_dir_) {
    auto path = *sidecar_dir_ / sidecar_filename(request.video_uri);
    if (std::filesystem::exists(path)) return read_sidecar(path, request.video_index);
  }
  if (!captioner_) {
    throw CaptionerUnavailable("no captioner configured and no sidecar for " + request.video_uri);
  }
  json modalities = json::array();
  for (auto m : request.modalities) modalities.push_back(modality_name(m));
  const std::string key = cache_key("caption", captioner_->id(), "", nullptr,
                                    json{{"uri", request.video_uri}, {"modalities", modalities}},
                                    "");
  auto reindex = [&](model::CaptionTrack track) {
    track.video_index = request.video_index;
    for (auto& s : track.segments) s.video_index = request.video_index;
    std::stable_sort(track.segments.begin(), track.segments.end(),
                     [](const auto& a, const auto& b) { return a.start_sec < b.start_sec; });
    return track;
  };
  if (auto hit = cache_->get(key)) {
    record_hit(true);
    model::json_io::Reader reader;
    model::CaptionTrack track;
    model::from_value(*hit, "", reader, track);
    return reindex(std::move(track));
  }
  record_hit(false);
  model::CaptionTrack track = with_retry(
      [&] {
        record_call("caption:" + key);
        return captioner_->caption(request);
      },
      [](const std::string& m) { return CaptionerUnavailable(m); });
  track = reindex(std::move(track));
  cache_->put(key, model::to_value(track));
  return track;
}

std::string Gateway::submit_video(const VideoJobRequest& request) {
  if (!generator_) throw GeneratorUnavailable("no video generator configured");
  const std::string key =
      cache_key("video", generator_->id(), "", nullptr,
                json{{"prompt", request.prompt},
                     {"duration_sec", request.duration_sec},
                     {"seed", request.seed}},
                "");
  const std::string job_id = "job-" + key.substr(0, 16);
  {
    std::lock_guard lock(mu_);
    if (jobs_.count(job_id)) return job_id;
  }
  if (cache_->get(key)) {
    record_hit(true);
    std::lock_guard lock(mu_);
    jobs_[job_id] = key;
    return job_id;
  }
  record_hit(false);
  with_retry(
      [&] {
        record_call("video:" + key);
        generator_->submit(job_id, request);
        return 0;
      },
      [](const std::string& m) { return GeneratorUnavailable(m); });
  std::lock_guard lock(mu_);
  jobs_[job_id] = key;
  return job_id;
}

VideoJobStatus Gateway::poll_video(const std::string& job_id) {
  std::string key;
  {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw UnknownJob(job_id);
    key = it->second;
  }
  if (auto hit = cache_->get(key)) {
    record_hit(true);
    return status_from_json(*hit);
  }
  VideoJobStatus status = with_retry(
      [&] {
        record_call("video_poll:" + job_id);
        return generator_->poll(job_id);
      },
      [](const std::string& m) { return GeneratorUnavailable(m); });
  status.job_id = job_id;
  // Terminal states are immutable, so only they are cached.
  if (status.terminal()) cache_->put(key, status_to_json(status));
  return status;
}

double Gateway::similarity(const SimilarityRequest& request) {
  if (!scorer_) throw ScorerUnavailable("no similarity scorer configured");
  const std::string key = cache_key("similarity", scorer_->id(), "", nullptr,
                                    json{{"image", request.image_ref}, {"text", request.text}},
                                    "");
  if (auto hit = cache_->get(key)) {
    record_hit(true);
    return hit->get<double>();
  }
  record_hit(false);
  double score = with_retry(
      [&] {
        record_call("similarity:" + key);
        return scorer_->score(request);
      },
      [](const std::string& m) { return ScorerUnavailable(m); });
  if (!(score >= -1.0 && score <= 1.0)) {
    double clamped = std::isnan(score) ? 0.0 : std::clamp(score, -1.0, 1.0);
    warn("similarity " + model::format_decimal(score) + " for " + request.image_ref +
         " clamped to " + model::format_decimal(clamped));
    score = clamped;
  }
  cache_->put(key, json(score));
  return score;
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Gateway::reset_stats() {
  std::lock_guard lock(mu_);
  stats_ = {};
}

}  // namespace mmplan::gateway
