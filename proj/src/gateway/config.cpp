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

#include "mmplan/gateway/config.hpp"

#include "mmplan/gateway/http_backends.hpp"
#include "mmplan/gateway/synthetic_chat.hpp"
#include "mmplan/model/json_io.hpp"

namespace mmplan::gateway {
namespace {

using model::json_io::Reader;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

HttpOptions http_options(const Reader& r, const json& entry, const std::string& path) {
  HttpOptions o;
  o.endpoint = r.string(entry, "endpoint", path);
  o.auth_env = r.opt_string(entry, "auth_env", path).value_or("");
  if (auto t = r.opt_number(entry, "timeout_sec", path)) {
    o.timeout = std::chrono::seconds(static_cast<long>(*t));
  }
  return o;
}

std::uint64_t seed_of(const Reader& r, const json& entry, const std::string& path) {
  return entry.contains("seed") ? static_cast<std::uint64_t>(r.integer(entry, "seed", path)) : 7;
}

bool is_stub(const Reader& r, const json& entry, const std::string& path) {
  const std::string kind = r.string(entry, "kind", path);
  if (kind != "stub" && kind != "real") {
    throw SchemaError(Reader::child(path, "kind"), "expected \"stub\" or \"real\"");
  }
  return kind == "stub";
}

void add_chat_entry(Gateway& g, const Reader& r, const json& entry, const std::string& path) {
  r.object(entry, path);
  const std::string model_id = r.string(entry, "model_id", path);
  if (is_stub(r, entry, path)) {
    g.add_chat(model_id, std::make_shared<SyntheticChat>(seed_of(r, entry, path), model_id));
  } else {
    g.add_chat(model_id, std::make_shared<HttpChat>(http_options(r, entry, path)));
  }
}

}  // namespace

std::unique_ptr<Gateway> build_gateway(const json& config, const std::filesystem::path& base_dir) {
  Reader r;
  r.object(config, "");
  std::shared_ptr<ResponseCache> cache;
  if (auto dir = r.opt_string(config, "cache_dir", "")) {
    cache = std::make_shared<FileCache>(resolve(base_dir, *dir));
  } else {
    cache = std::make_shared<MemoryCache>();
  }
  auto g = std::make_unique<Gateway>(cache);

  if (config.contains("retry")) {
    const json& retry = r.member(config, "retry", "");
    RetryPolicy policy;
    if (retry.contains("attempts")) policy.attempts = static_cast<int>(r.integer(retry, "attempts", "/retry"));
    if (retry.contains("base_delay_ms")) {
      policy.base_delay = std::chrono::milliseconds(r.integer(retry, "base_delay_ms", "/retry"));
    }
    g->set_retry(policy);
  }

  if (config.contains("chat")) {
    const json& chat = config["chat"];
    if (chat.is_array()) {
      for (std::size_t i = 0; i < chat.size(); ++i) {
        add_chat_entry(*g, r, chat[i], Reader::child("/chat", i));
      }
    } else {
      add_chat_entry(*g, r, chat, "/chat");
    }
  }

  if (config.contains("captioner")) {
    const json& c = r.member(config, "captioner", "");
    r.object(c, "/captioner");
    if (auto dir = r.opt_string(c, "sidecar_dir", "/captioner")) {
      g->set_sidecar_dir(resolve(base_dir, *dir));
    }
    if (is_stub(r, c, "/captioner")) {
      g->set_captioner(std::make_shared<StubCaptioner>(seed_of(r, c, "/captioner")));
    } else {
      g->set_captioner(std::make_shared<HttpCaptioner>(http_options(r, c, "/captioner")));
    }
  }

  if (config.contains("video")) {
    const json& v = r.member(config, "video", "");
    r.object(v, "/video");
    if (is_stub(r, v, "/video")) {
      int polls = v.contains("polls_to_done")
                      ? static_cast<int>(r.integer(v, "polls_to_done", "/video"))
                      : 2;
      g->set_video_generator(std::make_shared<StubVideoGenerator>(seed_of(r, v, "/video"), polls));
    } else {
      g->set_video_generator(std::make_shared<HttpVideoGenerator>(http_options(r, v, "/video")));
    }
  }

  if (config.contains("similarity")) {
    const json& s = r.member(config, "similarity", "");
    r.object(s, "/similarity");
    if (is_stub(r, s, "/similarity")) {
      if (auto c = r.opt_number(s, "constant", "/similarity")) {
        g->set_scorer(std::make_shared<ConstantScorer>(*c));
      } else {
        g->set_scorer(std::make_shared<HashScorer>(seed_of(r, s, "/similarity")));
      }
    } else {
      g->set_scorer(std::make_shared<HttpScorer>(http_options(r, s, "/similarity")));
    }
  }
  return g;
}

std::unique_ptr<Gateway> load_gateway(const std::filesystem::path& config_path) {
  return build_gateway(model::json_io::parse_file(config_path), config_path.parent_path());
}

json stub_config(std::uint64_t seed) {
  return {
      {"chat", json::array({{{"kind", "stub"}, {"model_id", "stub-llm"}, {"seed", seed}},
                            {{"kind", "stub"}, {"model_id", "stub-judge"}, {"seed", seed}}})},
      {"captioner", {{"kind", "stub"}, {"seed", seed}}},
      {"video", {{"kind", "stub"}, {"seed", seed}, {"polls_to_done", 2}}},
      {"similarity", {{"kind", "stub"}, {"seed", seed}}},
  };
}

}  // namespace mmplan::gateway
