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

#include "itericl/trace_io.h"

#include <fstream>
#include <istream>

#include "absl/strings/str_cat.h"
#include "itericl/status_macros.h"

namespace itericl {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json TraceToJson(const InferenceTrace& trace) {
  ordered_json iterations = ordered_json::array();
  for (const IterationRecord& r : trace.records) {
    ordered_json rec;
    rec["index"] = r.index;
    rec["example_ids"] = r.example_ids;
    rec["answer"] = r.answer;
    rec["token_probs"] = r.token_probs;
    rec["confidence"] = r.confidence;
    rec["terminated_early"] = r.terminated_early;
    iterations.push_back(std::move(rec));
  }
  ordered_json out;
  out["query_id"] = trace.query_id;
  out["strategy"] = trace.strategy;
  out["final_answer"] = trace.final_answer;
  out["final_confidence"] = trace.final_confidence;
  out["iterations"] = std::move(iterations);
  out["seed"] = trace.seed ? ordered_json(*trace.seed) : ordered_json(nullptr);
  if (!trace.status.ok()) out["error"] = std::string(trace.status.message());
  return out;
}

absl::StatusOr<InferenceTrace> TraceFromJson(const json& j) {
  try {
    InferenceTrace trace;
    trace.query_id = j.at("query_id").get<std::string>();
    trace.strategy = j.at("strategy").get<std::string>();
    trace.final_answer = j.at("final_answer").get<std::string>();
    trace.final_confidence = j.at("final_confidence").get<double>();
    for (const json& r : j.at("iterations")) {
      IterationRecord rec;
      rec.index = r.at("index").get<int>();
      rec.example_ids = r.at("example_ids").get<std::vector<std::string>>();
      rec.answer = r.at("answer").get<std::string>();
      if (r.contains("token_probs")) {
        rec.token_probs = r.at("token_probs").get<std::vector<double>>();
      }
      rec.confidence = r.at("confidence").get<double>();
      rec.terminated_early = r.at("terminated_early").get<bool>();
      trace.records.push_back(std::move(rec));
    }
    if (j.contains("seed") && !j.at("seed").is_null()) {
      trace.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("error") && j.at("error").is_string()) {
      trace.status = absl::UnknownError(j.at("error").get<std::string>());
    }
    return trace;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed trace: ", e.what()));
  }
}

std::string SerializeTrace(const InferenceTrace& trace) {
  return TraceToJson(trace).dump();
}

absl::Status WriteTraces(const std::filesystem::path& path,
                         std::span<const InferenceTrace> traces) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path.string()));
  for (const InferenceTrace& trace : traces) out << SerializeTrace(trace) << '\n';
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("write to ", path.string(), " failed"));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<InferenceTrace>> ParseTraces(std::istream& in) {
  std::vector<InferenceTrace> traces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json parsed = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
      return absl::InvalidArgumentError(absl::StrCat("line ", line_no, ": malformed JSON"));
    }
    auto trace = TraceFromJson(parsed);
    if (!trace.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", trace.status().message()));
    }
    traces.push_back(*std::move(trace));
  }
  return traces;
}

absl::StatusOr<std::vector<InferenceTrace>> LoadTraces(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  return ParseTraces(in);
}

}  // namespace itericl
