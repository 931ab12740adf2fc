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

#ifndef ITERICL_HTTP_BACKEND_H_
#define ITERICL_HTTP_BACKEND_H_

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "itericl/backend.h"
#include "json.hpp"

namespace itericl {

// Bounded exponential backoff for transient failures (transport errors,
// timeouts, HTTP 429 and 5xx).
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{5000};

  std::chrono::milliseconds BackoffBefore(int attempt) const;
};

inline constexpr std::string_view kApiKeyEnvVar = "ICL_API_KEY";

struct HttpBackendConfig {
  // Base URL, e.g. "http://localhost:8000/v1"; requests go to
  // {endpoint}/chat/completions.
  std::string endpoint;
  std::string model;
  // Falls back to the ICL_API_KEY environment variable when unset.
  std::optional<std::string> api_key;
  int max_tokens = 256;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  int max_in_flight = 4;
};

// Chat-completions body: alternating user/assistant turns for the
// demonstrations, videos as "video_url" content parts, greedy decoding with
// per-token log-probabilities requested.
nlohmann::json BuildChatCompletionRequest(
    const HttpBackendConfig& config, std::span<const PromptSegment> segments);

// Reads choices[0].message.content and choices[0].logprobs.content[*].logprob,
// converting each log-probability to exp(logprob).
absl::StatusOr<GenerationOutput> ParseChatCompletionResponse(
    std::string_view body);

class HttpBackend final : public Backend {
 public:
  static absl::StatusOr<std::unique_ptr<HttpBackend>> Create(
      HttpBackendConfig config);

  std::string name() const override { return "http"; }
  absl::StatusOr<GenerationOutput> Generate(
      const GenerationRequest& request) override;

 private:
  explicit HttpBackend(HttpBackendConfig config);

  HttpBackendConfig config_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace itericl

#endif  // ITERICL_HTTP_BACKEND_H_
