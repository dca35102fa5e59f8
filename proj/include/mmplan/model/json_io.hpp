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

// Path-tracking helpers for reading canonical documents. Every accessor
// throws SchemaError carrying the JSON pointer of the offending field.

#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmplan/model/errors.hpp"

namespace mmplan::model::json_io {

using json = nlohmann::json;

inline constexpr std::string_view kSchemaVersion = "1";

class Reader {
 public:
  explicit Reader(std::vector<std::string>* warnings = nullptr) : warnings_(warnings) {}

  static std::string child(const std::string& path, std::string_view key);
  static std::string child(const std::string& path, std::size_t index);

  const json& object(const json& j, const std::string& path) const;
  const json& array(const json& parent, std::string_view key, const std::string& path) const;
  const json& member(const json& parent, std::string_view key, const std::string& path) const;

  std::string string(const json& parent, std::string_view key, const std::string& path) const;
  std::optional<std::string> opt_string(const json& parent, std::string_view key,
                                        const std::string& path) const;
  long long integer(const json& parent, std::string_view key, const std::string& path) const;
  double number(const json& parent, std::string_view key, const std::string& path) const;
  std::optional<double> opt_number(const json& parent, std::string_view key,
                                   const std::string& path) const;
  bool boolean(const json& parent, std::string_view key, const std::string& path) const;
  std::vector<std::string> strings(const json& parent, std::string_view key,
                                   const std::string& path) const;

  // Unknown members are accepted; each one records a warning.
  void check_known(const json& obj, std::initializer_list<std::string_view> known,
                   const std::string& path) const;

  void warn(std::string message) const;

 private:
  std::vector<std::string>* warnings_;
};

// Top-level envelope: checks and strips "schema_version".
void check_schema_version(const json& doc);

json parse_file(const std::filesystem::path& path);
json parse_text(std::string_view text, const std::string& origin);

// Writes `doc` to `path` via a temporary file and rename, so readers never
// observe a partial document.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string dump(const json& doc);

}  // namespace mmplan::model::json_io
