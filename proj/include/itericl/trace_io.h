// Copyright 2026 The itericl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ITERICL_TRACE_IO_H_
#define ITERICL_TRACE_IO_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "itericl/inference_engine.h"
#include "json.hpp"

namespace itericl {

// {"query_id", "strategy", "final_answer", "final_confidence", "iterations":
// [{"index", "example_ids", "answer", "token_probs", "confidence",
// "terminated_early"}...], "seed"} plus "error" for failed queries. Key
// order is fixed so serialized traces are byte-stable.
nlohmann::ordered_json TraceToJson(const InferenceTrace& trace);
absl::StatusOr<InferenceTrace> TraceFromJson(const nlohmann::json& j);

// One compact JSON object, no trailing newline.
std::string SerializeTrace(const InferenceTrace& trace);

absl::Status WriteTraces(const std::filesystem::path& path,
                         std::span<const InferenceTrace> traces);
absl::StatusOr<std::vector<InferenceTrace>> ParseTraces(std::istream& in);
absl::StatusOr<std::vector<InferenceTrace>> LoadTraces(
    const std::filesystem::path& path);

}  // namespace itericl

#endif  // ITERICL_TRACE_IO_H_
