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

#include "http_transport.h"

#include <thread>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "httplib.h"
#include "itericl/backend.h"
#include "spdlog/spdlog.h"

namespace itericl::internal {
namespace {

bool IsRetryable(const absl::Status& status) {
  auto kind = GetBackendErrorKind(status);
  if (!kind) return false;
  switch (*kind) {
    case BackendErrorKind::kTransport:
    case BackendErrorKind::kTimeout:
      return true;
    case BackendErrorKind::kHttpStatus:
      // Message is "HTTP <code>: ..."; retry 429 and 5xx only.
      return absl::StartsWith(status.message(), "HTTP 429") ||
             absl::StartsWith(status.message(), "HTTP 5");
    default:
      return false;
  }
}

absl::StatusOr<std::string> PostOnce(const HttpEndpoint& endpoint,
                                     const std::string& path,
                                     const std::string& body,
                                     const PostOptions& options) {
  httplib::Client client(endpoint.scheme_host_port);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  httplib::Headers headers;
  if (options.bearer_token && !options.bearer_token->empty()) {
    headers.emplace("Authorization", absl::StrCat("Bearer ", *options.bearer_token));
  }
  const auto start = std::chrono::steady_clock::now();
  httplib::Result result = client.Post(path, headers, body, "application/json");
  if (!result) {
    const httplib::Error error = result.error();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const bool timed_out =
        error == httplib::Error::ConnectionTimeout ||
        (error == httplib::Error::Read && elapsed >= options.timeout);
    return BackendError(
        timed_out ? BackendErrorKind::kTimeout : BackendErrorKind::kTransport,
        absl::StrCat("POST ", endpoint.scheme_host_port, path, " failed: ",
                     httplib::to_string(error)));
  }
  if (result->status < 200 || result->status >= 300) {
    return BackendError(BackendErrorKind::kHttpStatus,
                        absl::StrCat("HTTP ", result->status, ": ",
                                     result->body.substr(0, 200)));
  }
  return std::move(result->body);
}

}  // namespace

absl::StatusOr<HttpEndpoint> ParseEndpoint(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("endpoint \"", std::string(url), "\" must start with http:// or https://"));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    return absl::InvalidArgumentError(
        absl::StrCat("unsupported endpoint scheme \"", std::string(scheme), "\""));
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  HttpEndpoint endpoint;
  if (path_start == std::string_view::npos) {
    endpoint.scheme_host_port = std::string(url);
  } else {
    endpoint.scheme_host_port = std::string(url.substr(0, path_start));
    endpoint.path_prefix = std::string(url.substr(path_start));
  }
  while (!endpoint.path_prefix.empty() && endpoint.path_prefix.back() == '/') {
    endpoint.path_prefix.pop_back();
  }
  if (endpoint.scheme_host_port.size() <= scheme_end + 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("endpoint \"", std::string(url), "\" has no host"));
  }
  return endpoint;
}

absl::StatusOr<std::string> PostJson(const HttpEndpoint& endpoint,
                                     std::string_view path,
                                     const std::string& body,
                                     const PostOptions& options) {
  const std::string full_path = absl::StrCat(endpoint.path_prefix, std::string(path));
  const int attempts = std::max(1, options.retry.max_attempts);
  absl::Status last;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(options.retry.BackoffBefore(attempt));
    }
    absl::StatusOr<std::string> response =
        PostOnce(endpoint, full_path, body, options);
    if (response.ok()) return response;
    last = response.status();
    if (!IsRetryable(last)) return last;
    spdlog::warn("attempt {}/{} failed: {}", attempt, attempts, std::string(last.message()));
  }
  return last;
}

}  // namespace itericl::internal
