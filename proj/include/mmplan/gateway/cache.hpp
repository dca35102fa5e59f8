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

// Content-addressed response cache.
//
// A key is the SHA-256 of a canonical JSON document over everything that can
// change a backend's answer. Entries are write-once: the first completed put
// for a key wins and later puts are no-ops, so concurrent workers racing on
// the same request cannot flip a stored response.

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mmplan/model/types.hpp"

namespace mmplan::gateway {

using json = nlohmann::json;

std::string cache_key(std::string_view capability, std::string_view backend_id,
                      std::string_view model_id, const model::InferenceParams* params,
                      const json& payload, std::string_view template_version);

class ResponseCache {
 public:
  virtual ~ResponseCache() = default;
  virtual std::optional<json> get(const std::string& key) const = 0;
  // Returns false when an entry already existed.
  virtual bool put(const std::string& key, const json& value) = 0;
};

class MemoryCache : public ResponseCache {
 public:
  std::optional<json> get(const std::string& key) const override;
  bool put(const std::string& key, const json& value) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, json> entries_;
};

// One file per key at <dir>/<key[0:2]>/<key>.json. Each file records its own
// key, and a read whose stored key differs from the requested one is a miss.
class FileCache : public ResponseCache {
 public:
  explicit FileCache(std::filesystem::path dir);

  std::optional<json> get(const std::string& key) const override;
  bool put(const std::string& key, const json& value) override;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
};

}  // namespace mmplan::gateway
