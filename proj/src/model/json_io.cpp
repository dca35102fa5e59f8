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

#include "mmplan/model/json_io.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace mmplan::model::json_io {
namespace {

std::string escape_pointer_token(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string type_name(const json& j) { return j.type_name(); }

}  // namespace

std::string Reader::child(const std::string& path, std::string_view key) {
  return path + "/" + escape_pointer_token(key);
}

std::string Reader::child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

const json& Reader::object(const json& j, const std::string& path) const {
  if (!j.is_object()) {
    throw SchemaError(path.empty() ? "/" : path, "expected object, got " + type_name(j));
  }
  return j;
}

const json& Reader::member(const json& parent, std::string_view key,
                           const std::string& path) const {
  object(parent, path);
  auto it = parent.find(std::string(key));
  if (it == parent.end()) throw SchemaError(child(path, key), "missing required field");
  return *it;
}

const json& Reader::array(const json& parent, std::string_view key,
                          const std::string& path) const {
  const json& v = member(parent, key, path);
  if (!v.is_array()) throw SchemaError(child(path, key), "expected array, got " + type_name(v));
  return v;
}

std::string Reader::string(const json& parent, std::string_view key,
                           const std::string& path) const {
  const json& v = member(parent, key, path);
  if (!v.is_string()) throw SchemaError(child(path, key), "expected string, got " + type_name(v));
  return v.get<std::string>();
}

std::optional<std::string> Reader::opt_string(const json& parent, std::string_view key,
                                              const std::string& path) const {
  object(parent, path);
  auto it = parent.find(std::string(key));
  if (it == parent.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw SchemaError(child(path, key), "expected string, got " + type_name(*it));
  }
  return it->get<std::string>();
}

long long Reader::integer(const json& parent, std::string_view key,
                          const std::string& path) const {
  const json& v = member(parent, key, path);
  if (!v.is_number_integer()) {
    throw SchemaError(child(path, key), "expected integer, got " + type_name(v));
  }
  return v.get<long long>();
}

double Reader::number(const json& parent, std::string_view key, const std::string& path) const {
  const json& v = member(parent, key, path);
  if (!v.is_number()) throw SchemaError(child(path, key), "expected number, got " + type_name(v));
  return v.get<double>();
}

std::optional<double> Reader::opt_number(const json& parent, std::string_view key,
                                         const std::string& path) const {
  object(parent, path);
  auto it = parent.find(std::string(key));
  if (it == parent.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    throw SchemaError(child(path, key), "expected number, got " + type_name(*it));
  }
  return it->get<double>();
}

bool Reader::boolean(const json& parent, std::string_view key, const std::string& path) const {
  const json& v = member(parent, key, path);
  if (!v.is_boolean()) {
    throw SchemaError(child(path, key), "expected boolean, got " + type_name(v));
  }
  return v.get<bool>();
}

std::vector<std::string> Reader::strings(const json& parent, std::string_view key,
                                         const std::string& path) const {
  const json& arr = array(parent, key, path);
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) {
      throw SchemaError(child(child(path, key), i), "expected string, got " + type_name(arr[i]));
    }
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

void Reader::check_known(const json& obj, std::initializer_list<std::string_view> known,
                         const std::string& path) const {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      warn("unknown field " + child(path, it.key()) + " ignored");
    }
  }
}

void Reader::warn(std::string message) const {
  if (warnings_ != nullptr) warnings_->push_back(std::move(message));
}

void check_schema_version(const json& doc) {
  if (!doc.is_object()) throw SchemaError("/", "expected object, got " + type_name(doc));
  auto it = doc.find("schema_version");
  if (it == doc.end()) throw SchemaError("/schema_version", "missing required field");
  if (!it->is_string() || it->get<std::string>() != kSchemaVersion) {
    throw SchemaError("/schema_version", "unsupported schema version " + it->dump());
  }
}

json parse_text(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("/", origin + ": malformed document: " + e.what());
  }
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path.string());
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned long> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id() << "." << counter.fetch_add(1);
  std::filesystem::path tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error("IoError", "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace mmplan::model::json_io
