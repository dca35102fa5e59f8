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

#include <cstdint>
#include <string>
#include <string_view>

namespace mmplan::model {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// First 8 bytes of the SHA-256, for seeding deterministic stubs.
std::uint64_t sha256_u64(std::string_view data);

// Shortest decimal form that round-trips: 17 -> "17", 17.5 -> "17.5".
std::string format_decimal(double value);

}  // namespace mmplan::model
