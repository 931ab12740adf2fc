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

#include "itericl/confidence.h"

#include <algorithm>
#include <cctype>

#include "absl/strings/str_cat.h"
#include "itericl/status_macros.h"

namespace itericl {
namespace {

class MinTokenProbEstimator final : public ConfidenceEstimator {
 public:
  EstimatorKind kind() const override { return EstimatorKind::kMinTokenProb; }
  absl::StatusOr<double> Estimate(Backend&, const GenerationRequest&,
                                  const GenerationOutput& output) const override {
    ASSIGN_OR_RETURN(ConfidenceValue c, MinTokenProbConfidence(output.token_probs));
    return c.value;
  }
};

class VerbalizationEstimator final : public ConfidenceEstimator {
 public:
  explicit VerbalizationEstimator(TemplateConfig tmpl) : tmpl_(std::move(tmpl)) {}
  EstimatorKind kind() const override { return EstimatorKind::kVerbalization; }
  absl::StatusOr<double> Estimate(Backend& backend,
                                  const GenerationRequest& request,
                                  const GenerationOutput& output) const override {
    return VerbalizationConfidence(backend, request, output.answer, tmpl_);
  }

 private:
  TemplateConfig tmpl_;
};

}  // namespace

absl::StatusOr<ConfidenceValue> MinTokenProbConfidence(
    std::span<const double> token_probs) {
  if (token_probs.empty()) return ConfidenceValue{0.0, true};
  for (std::size_t i = 0; i < token_probs.size(); ++i) {
    const double p = token_probs[i];
    if (!(p > 0.0 && p <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("token probability ", i, " = ", p, " outside (0, 1]"));
    }
  }
  return ConfidenceValue{*std::min_element(token_probs.begin(), token_probs.end()),
                         false};
}

std::vector<PromptSegment> BuildConfidenceProbe(
    std::span<const PromptSegment> answered_segments, std::string_view answer,
    const TemplateConfig& tmpl) {
  std::vector<PromptSegment> probe(answered_segments.begin(),
                                   answered_segments.end());
  if (!probe.empty() && probe.back().role == SegmentRole::kQueryQuestion) {
    probe.back().role = SegmentRole::kDemonstrationQuestion;
  }
  probe.push_back(
      {SegmentRole::kDemonstrationAnswer, std::string(answer), std::nullopt});
  probe.push_back(
      {SegmentRole::kQueryQuestion, tmpl.confidence_question, std::nullopt});
  return probe;
}

bool IsAffirmative(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[i]))) ++i;
  std::string word;
  while (i < reply.size() && std::isalpha(static_cast<unsigned char>(reply[i]))) {
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(reply[i]))));
    ++i;
  }
  return word == "yes";
}

absl::StatusOr<double> VerbalizationConfidence(
    Backend& backend, const GenerationRequest& answered_request,
    std::string_view answer, const TemplateConfig& tmpl) {
  GenerationRequest probe{
      .query_id = answered_request.query_id,
      .segments = BuildConfidenceProbe(answered_request.segments, answer, tmpl),
      .purpose = RequestPurpose::kConfidenceProbe};
  ASSIGN_OR_RETURN(GenerationOutput reply, Generate(backend, probe));
  return IsAffirmative(reply.answer) ? 1.0 : 0.0;
}

std::string_view EstimatorKindName(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kMinTokenProb:
      return "min_token_prob";
    case EstimatorKind::kVerbalization:
      return "verbalization";
  }
  return "unknown";
}

absl::StatusOr<EstimatorKind> ParseEstimatorKind(std::string_view name) {
  if (name == "min_token_prob") return EstimatorKind::kMinTokenProb;
  if (name == "verbalization") return EstimatorKind::kVerbalization;
  return absl::InvalidArgumentError(absl::StrCat("unknown estimator \"", std::string(name), "\""));
}

std::unique_ptr<ConfidenceEstimator> MakeEstimator(EstimatorKind kind,
                                                   TemplateConfig tmpl) {
  switch (kind) {
    case EstimatorKind::kVerbalization:
      return std::make_unique<VerbalizationEstimator>(std::move(tmpl));
    case EstimatorKind::kMinTokenProb:
      break;
  }
  return std::make_unique<MinTokenProbEstimator>();
}

}  // namespace itericl
