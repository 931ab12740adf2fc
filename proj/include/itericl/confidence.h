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

#ifndef ITERICL_CONFIDENCE_H_
#define ITERICL_CONFIDENCE_H_

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "itericl/backend.h"

namespace itericl {

struct ConfidenceValue {
  double value = 0.0;
  // Set for an empty token sequence, whose confidence is defined as 0.
  bool degenerate = false;
};

// Minimum of the token probabilities. Any probability outside (0, 1] is an
// error.
absl::StatusOr<ConfidenceValue> MinTokenProbConfidence(
    std::span<const double> token_probs);

// Prompt that replays the answered exchange as a final demonstration and then
// asks `tmpl.confidence_question`.
std::vector<PromptSegment> BuildConfidenceProbe(
    std::span<const PromptSegment> answered_segments, std::string_view answer,
    const TemplateConfig& tmpl);

// True when the reply's first word is "yes" (case-insensitive).
bool IsAffirmative(std::string_view reply);

// One extra generation asking whether the model is confident; 1 for an
// affirmative reply, 0 otherwise.
absl::StatusOr<double> VerbalizationConfidence(
    Backend& backend, const GenerationRequest& answered_request,
    std::string_view answer, const TemplateConfig& tmpl);

enum class EstimatorKind { kMinTokenProb, kVerbalization };

std::string_view EstimatorKindName(EstimatorKind kind);
absl::StatusOr<EstimatorKind> ParseEstimatorKind(std::string_view name);

// Scores a generated answer. Outputs lie in [0, 1].
class ConfidenceEstimator {
 public:
  virtual ~ConfidenceEstimator() = default;
  virtual EstimatorKind kind() const = 0;
  virtual absl::StatusOr<double> Estimate(
      Backend& backend, const GenerationRequest& request,
      const GenerationOutput& output) const = 0;
};

std::unique_ptr<ConfidenceEstimator> MakeEstimator(EstimatorKind kind,
                                                   TemplateConfig tmpl = {});

}  // namespace itericl

#endif  // ITERICL_CONFIDENCE_H_
