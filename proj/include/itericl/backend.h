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

#ifndef ITERICL_BACKEND_H_
#define ITERICL_BACKEND_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "itericl/example_store.h"

namespace itericl {

enum class SegmentRole {
  kSystem,
  kDemonstrationQuestion,
  kDemonstrationAnswer,
  kQueryQuestion,
};

std::string_view SegmentRoleName(SegmentRole role);

struct PromptSegment {
  SegmentRole role = SegmentRole::kQueryQuestion;
  std::string text;
  std::optional<std::string> video_ref;

  friend bool operator==(const PromptSegment&, const PromptSegment&) = default;
};

struct TemplateConfig {
  // Emitted as a leading system segment when nonempty.
  std::string system_prompt =
      "You are a helpful assistant. Answer the question about the video "
      "concisely.";
  // Prepended to every demonstration and query question.
  std::string question_prefix;
  // Follow-up question used by the verbalized confidence estimator.
  std::string confidence_question =
      "Are you confident that your previous answer is correct? Answer Yes or "
      "No.";
};

// Optional system segment, then (question + video, answer) per demonstration
// in order, then the query question + video. Pure function of its inputs.
std::vector<PromptSegment> AssemblePrompt(
    std::span<const Demonstration* const> demos, const Query& query,
    const TemplateConfig& tmpl);

// Demonstration segments must alternate question/answer and the list must
// end with exactly one query question.
absl::Status ValidatePromptSegments(std::span<const PromptSegment> segments);

enum class RequestPurpose {
  kAnswer,
  // Follow-up asking the model whether it is confident in its answer.
  kConfidenceProbe,
};

struct GenerationRequest {
  // Used by test doubles to route scripted responses; not sent over HTTP.
  std::string query_id;
  std::vector<PromptSegment> segments;
  RequestPurpose purpose = RequestPurpose::kAnswer;
};

struct GenerationOutput {
  std::string answer;
  // Probability of each generated token, in generation order.
  std::vector<double> token_probs;
  std::map<std::string, std::string> backend_meta;
};

// Every probability in (0, 1] and nonempty when the answer is nonempty.
absl::Status ValidateGenerationOutput(const GenerationOutput& output);

// Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual absl::StatusOr<GenerationOutput> Generate(
      const GenerationRequest& request) = 0;
};

// Validates segments, calls the backend and rejects malformed outputs.
absl::StatusOr<GenerationOutput> Generate(Backend& backend,
                                          const GenerationRequest& request);

enum class BackendErrorKind {
  kTransport,
  kTimeout,
  kHttpStatus,
  kMissingTokenProbabilities,
  kInvalidProbability,
  kMalformedResponse,
  kScriptExhausted,
};

std::string_view BackendErrorKindName(BackendErrorKind kind);

// Status tagged with `kind` (as a payload) so callers can tell failure modes
// apart independently of the status code.
absl::Status BackendError(BackendErrorKind kind, std::string_view message);
std::optional<BackendErrorKind> GetBackendErrorKind(const absl::Status& status);

}  // namespace itericl

#endif  // ITERICL_BACKEND_H_
