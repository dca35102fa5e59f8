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

#include "mmplan/gateway/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <unistd.h>

#include "mmplan/model/digest.hpp"
#include "mmplan/model/serialize.hpp"

namespace mmplan::gateway {

std::string cache_key(std::string_view capability, std::string_view backend_id,
                      std::string_view model_id, const model::InferenceParams* params,
                      const json& payload, std::string_view template_version) {
  json doc = {
      {"capability", capability},
      {"backend_id", backend_id},
      {"model_id", model_id},
      {"params", params != nullptr ? model::to_value(*params) : json(nullptr)},
      {"payload", payload},
      {"template_version", template_version},
  };
  return model::sha256_hex(doc.dump());
}

std::optional<json> MemoryCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool MemoryCache::put(const std::string& key, const json& value) {
  std::lock_guard lock(mu_);
  return entries_.emplace(key, value).second;
}

FileCache::FileCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path FileCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<json> FileCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("key", "") != key) return std::nullopt;
  return doc.at("value");
}

bool FileCache::put(const std::string& key, const json& value) {
  static std::atomic<unsigned long> counter{0};
  const auto final_path = path_for(key);
  std::filesystem::create_directories(final_path.parent_path());
  std::ostringstream tmp_name;
  tmp_name << key << ".tmp." << ::getpid() << "." << counter++;
  const auto tmp_path = final_path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << json{{"key", key}, {"value", value}}.dump();
    if (!out) throw std::runtime_error("cannot write cache entry " + tmp_path.string());
  }
  // link() fails on an existing target, which gives first-writer-wins
  // without a lock file.
  std::error_code ec;
  std::filesystem::create_hard_link(tmp_path, final_path, ec);
  std::filesystem::remove(tmp_path);
  if (ec == std::errc::file_exists) return false;
  if (ec) throw std::system_error(ec, "cache link " + final_path.string());
  return true;
}

}  // namespace mmplan::gateway
