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

// Backend configuration document.
//
//   {
//     "cache_dir": "cache",                        // optional; in-memory when absent
//     "retry": {"attempts": 3, "base_delay_ms": 1000},
//     "chat": [{"kind": "stub", "model_id": "stub-llm", "seed": 7},
//              {"kind": "real", "model_id": "llama2-7b", "endpoint": "http://localhost:8080",
//               "auth_env": "LLM_API_KEY", "timeout_sec": 120}],
//     "captioner": {"kind": "stub", "seed": 7, "sidecar_dir": "captions"},
//     "video": {"kind": "stub", "seed": 7, "polls_to_done": 2},
//     "similarity": {"kind": "stub", "constant": 0.5}          // or "seed" for hashed scores
//   }
//
// "chat" may also be a single object. Relative paths resolve against the
// directory holding the config file.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include <json.hpp>

#include "mmplan/gateway/gateway.hpp"

namespace mmplan::gateway {

std::unique_ptr<Gateway> build_gateway(const nlohmann::json& config,
                                       const std::filesystem::path& base_dir = ".");
std::unique_ptr<Gateway> load_gateway(const std::filesystem::path& config_path);

// All four capabilities stubbed; chat model id "stub-llm" plus "stub-judge".
nlohmann::json stub_config(std::uint64_t seed = 7);

}  // namespace mmplan::gateway
