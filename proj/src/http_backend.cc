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

#include "itericl/http_backend.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "absl/strings/str_cat.h"
#include "http_transport.h"
#include "itericl/status_macros.h"

namespace itericl {
namespace {

using json = nlohmann::json;

json UserTurn(const PromptSegment& segment) {
  json content = json::array();
  if (segment.video_ref) {
    content.push_back(
        {{"type", "video_url"}, {"video_url", {{"url", *segment.video_ref}}}});
  }
  content.push_back({{"type", "text"}, {"text", segment.text}});
  return {{"role", "user"}, {"content", std::move(content)}};
}

// Releases a semaphore slot on scope exit.
class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

std::chrono::milliseconds RetryPolicy::BackoffBefore(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds(0);
  const double scaled = static_cast<double>(initial_backoff.count()) *
                        std::pow(multiplier, attempt - 2);
  const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

json BuildChatCompletionRequest(const HttpBackendConfig& config,
                                std::span<const PromptSegment> segments) {
  json messages = json::array();
  for (const PromptSegment& segment : segments) {
    switch (segment.role) {
      case SegmentRole::kSystem:
        messages.push_back({{"role", "system"}, {"content", segment.text}});
        break;
      case SegmentRole::kDemonstrationQuestion:
      case SegmentRole::kQueryQuestion:
        messages.push_back(UserTurn(segment));
        break;
      case SegmentRole::kDemonstrationAnswer:
        messages.push_back({{"role", "assistant"}, {"content", segment.text}});
        break;
    }
  }
  return {{"model", config.model},
          {"messages", std::move(messages)},
          {"temperature", 0},
          {"logprobs", true},
          {"top_logprobs", 1},
          {"max_tokens", config.max_tokens}};
}

absl::StatusOr<GenerationOutput> ParseChatCompletionResponse(
    std::string_view body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return BackendError(BackendErrorKind::kMalformedResponse,
                        "response is not a JSON object");
  }
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    return BackendError(BackendErrorKind::kMalformedResponse,
                        "response has no choices");
  }
  const json& choice = choices->front();
  const json* content = nullptr;
  if (auto message = choice.find("message");
      message != choice.end() && message->is_object()) {
    if (auto it = message->find("content"); it != message->end()) content = &*it;
  }
  if (content == nullptr || !content->is_string()) {
    return BackendError(BackendErrorKind::kMalformedResponse,
                        "response has no message content");
  }

  auto logprobs = choice.find("logprobs");
  if (logprobs == choice.end() || !logprobs->is_object() ||
      !logprobs->contains("content") || !(*logprobs)["content"].is_array()) {
    return BackendError(BackendErrorKind::kMissingTokenProbabilities,
                        "missing token probabilities");
  }
  GenerationOutput output{.answer = content->get<std::string>()};
  for (const json& token : (*logprobs)["content"]) {
    auto lp = token.find("logprob");
    if (lp == token.end() || !lp->is_number()) {
      return BackendError(BackendErrorKind::kMissingTokenProbabilities,
                          "missing token probabilities");
    }
    output.token_probs.push_back(std::exp(lp->get<double>()));
  }
  if (!output.answer.empty() && output.token_probs.empty()) {
    return BackendError(BackendErrorKind::kMissingTokenProbabilities,
                        "missing token probabilities");
  }
  if (auto model = doc.find("model"); model != doc.end() && model->is_string()) {
    output.backend_meta["model"] = model->get<std::string>();
  }
  if (auto reason = choice.find("finish_reason");
      reason != choice.end() && reason->is_string()) {
    output.backend_meta["finish_reason"] = reason->get<std::string>();
  }
  return output;
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), in_flight_(config_.max_in_flight) {}

absl::StatusOr<std::unique_ptr<HttpBackend>> HttpBackend::Create(
    HttpBackendConfig config) {
  RETURN_IF_ERROR(internal::ParseEndpoint(config.endpoint).status());
  if (config.model.empty()) {
    return absl::InvalidArgumentError("HTTP backend needs a model name");
  }
  if (config.max_in_flight < 1) {
    return absl::InvalidArgumentError("max_in_flight must be >= 1");
  }
  if (config.retry.max_attempts < 1) {
    return absl::InvalidArgumentError("retry max_attempts must be >= 1");
  }
  if (!config.api_key) {
    if (const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str())) {
      config.api_key = key;
    }
  }
  return std::unique_ptr<HttpBackend>(new HttpBackend(std::move(config)));
}

absl::StatusOr<GenerationOutput> HttpBackend::Generate(
    const GenerationRequest& request) {
  ASSIGN_OR_RETURN(internal::HttpEndpoint endpoint,
                   internal::ParseEndpoint(config_.endpoint));
  const std::string body =
      BuildChatCompletionRequest(config_, request.segments).dump();
  internal::PostOptions options{.timeout = config_.timeout,
                                .bearer_token = config_.api_key,
                                .retry = config_.retry};
  InFlightSlot slot(in_flight_);
  ASSIGN_OR_RETURN(std::string response,
                   internal::PostJson(endpoint, "/chat/completions", body, options));
  return ParseChatCompletionResponse(response);
}

}  // namespace itericl
