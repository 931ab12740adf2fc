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

#include "itericl/backend.h"

#include <cmath>

#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"
#include "itericl/status_macros.h"

namespace itericl {
namespace {

constexpr absl::string_view kErrorKindUrl = "type.itericl/backend_error_kind";

constexpr BackendErrorKind kAllKinds[] = {
    BackendErrorKind::kTransport,
    BackendErrorKind::kTimeout,
    BackendErrorKind::kHttpStatus,
    BackendErrorKind::kMissingTokenProbabilities,
    BackendErrorKind::kInvalidProbability,
    BackendErrorKind::kMalformedResponse,
    BackendErrorKind::kScriptExhausted,
};

absl::StatusCode CodeFor(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kTransport:
      return absl::StatusCode::kUnavailable;
    case BackendErrorKind::kTimeout:
      return absl::StatusCode::kDeadlineExceeded;
    case BackendErrorKind::kHttpStatus:
      return absl::StatusCode::kUnknown;
    case BackendErrorKind::kMissingTokenProbabilities:
    case BackendErrorKind::kInvalidProbability:
    case BackendErrorKind::kMalformedResponse:
      return absl::StatusCode::kDataLoss;
    case BackendErrorKind::kScriptExhausted:
      return absl::StatusCode::kOutOfRange;
  }
  return absl::StatusCode::kUnknown;
}

}  // namespace

std::string_view SegmentRoleName(SegmentRole role) {
  switch (role) {
    case SegmentRole::kSystem:
      return "system";
    case SegmentRole::kDemonstrationQuestion:
      return "demonstration_question";
    case SegmentRole::kDemonstrationAnswer:
      return "demonstration_answer";
    case SegmentRole::kQueryQuestion:
      return "query_question";
  }
  return "unknown";
}

std::vector<PromptSegment> AssemblePrompt(
    std::span<const Demonstration* const> demos, const Query& query,
    const TemplateConfig& tmpl) {
  std::vector<PromptSegment> segments;
  segments.reserve(2 * demos.size() + 2);
  if (!tmpl.system_prompt.empty()) {
    segments.push_back({SegmentRole::kSystem, tmpl.system_prompt, std::nullopt});
  }
  for (const Demonstration* demo : demos) {
    segments.push_back({SegmentRole::kDemonstrationQuestion,
                        absl::StrCat(tmpl.question_prefix, demo->question),
                        demo->video_ref});
    segments.push_back(
        {SegmentRole::kDemonstrationAnswer, demo->answer, std::nullopt});
  }
  segments.push_back({SegmentRole::kQueryQuestion,
                      absl::StrCat(tmpl.question_prefix, query.question),
                      query.video_ref});
  return segments;
}

absl::Status ValidatePromptSegments(std::span<const PromptSegment> segments) {
  if (segments.empty() || segments.back().role != SegmentRole::kQueryQuestion) {
    return absl::InvalidArgumentError(
        "prompt must end with a query_question segment");
  }
  bool expect_answer = false;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    switch (segments[i].role) {
      case SegmentRole::kSystem:
        if (i != 0) {
          return absl::InvalidArgumentError(
              "system segment must come first");
        }
        break;
      case SegmentRole::kDemonstrationQuestion:
        if (expect_answer) {
          return absl::InvalidArgumentError(absl::StrCat(
              "segment ", i, ": demonstration question without an answer"));
        }
        expect_answer = true;
        break;
      case SegmentRole::kDemonstrationAnswer:
        if (!expect_answer) {
          return absl::InvalidArgumentError(absl::StrCat(
              "segment ", i, ": demonstration answer without a question"));
        }
        expect_answer = false;
        break;
      case SegmentRole::kQueryQuestion:
        return absl::InvalidArgumentError(absl::StrCat(
            "segment ", i, ": query_question must be the last segment"));
    }
  }
  if (expect_answer) {
    return absl::InvalidArgumentError(
        "last demonstration question has no answer");
  }
  return absl::OkStatus();
}

absl::Status ValidateGenerationOutput(const GenerationOutput& output) {
  if (!output.answer.empty() && output.token_probs.empty()) {
    return BackendError(BackendErrorKind::kMissingTokenProbabilities,
                        "missing token probabilities");
  }
  for (std::size_t i = 0; i < output.token_probs.size(); ++i) {
    const double p = output.token_probs[i];
    if (!(p > 0.0 && p <= 1.0)) {
      return BackendError(
          BackendErrorKind::kInvalidProbability,
          absl::StrCat("token probability ", i, " = ", p, " outside (0, 1]"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<GenerationOutput> Generate(Backend& backend,
                                          const GenerationRequest& request) {
  RETURN_IF_ERROR(ValidatePromptSegments(request.segments));
  ASSIGN_OR_RETURN(GenerationOutput output, backend.Generate(request));
  RETURN_IF_ERROR(ValidateGenerationOutput(output));
  return output;
}

std::string_view BackendErrorKindName(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kTransport:
      return "transport";
    case BackendErrorKind::kTimeout:
      return "timeout";
    case BackendErrorKind::kHttpStatus:
      return "http_status";
    case BackendErrorKind::kMissingTokenProbabilities:
      return "missing_token_probabilities";
    case BackendErrorKind::kInvalidProbability:
      return "invalid_probability";
    case BackendErrorKind::kMalformedResponse:
      return "malformed_response";
    case BackendErrorKind::kScriptExhausted:
      return "script_exhausted";
  }
  return "unknown";
}

absl::Status BackendError(BackendErrorKind kind, std::string_view message) {
  absl::Status status(CodeFor(kind), absl::string_view(message.data(), message.size()));
  status.SetPayload(kErrorKindUrl, absl::Cord(std::string(BackendErrorKindName(kind))));
  return status;
}

std::optional<BackendErrorKind> GetBackendErrorKind(const absl::Status& status) {
  auto payload = status.GetPayload(kErrorKindUrl);
  if (!payload) return std::nullopt;
  const std::string name(*payload);
  for (BackendErrorKind kind : kAllKinds) {
    if (BackendErrorKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

}  // namespace itericl
