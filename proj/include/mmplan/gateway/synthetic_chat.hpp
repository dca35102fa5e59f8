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

// Offline chat stub that answers the pipeline's own prompts with plausible,
// deterministic completions. It recognises four prompt shapes by their
// fixed wording (vanilla plan, caption fusion, alignment, judge rubric) and
// refuses anything else. Output is a pure function of (seed, prompts).
//
// The output format varies with the seed on purpose (numbered lists vs
// "Step N:" prefixes, tagged vs labeled triples) so that offline runs
// exercise every parser strategy.

#pragma once

#include <cstdint>
#include <string>

#include "mmplan/gateway/backends.hpp"

namespace mmplan::gateway {

class SyntheticChat : public ChatBackend {
 public:
  explicit SyntheticChat(std::uint64_t seed, std::string name = "stub-llm")
      : seed_(seed), name_(std::move(name)) {}

  std::string id() const override;
  std::string complete(const ChatRequest& request) override;

  static constexpr std::string_view kRefusal = "I'm sorry, but I can't help with that request.";

 private:
  std::uint64_t seed_;
  std::string name_;
};

}  // namespace mmplan::gateway
