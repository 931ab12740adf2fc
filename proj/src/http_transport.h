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

#ifndef ITERICL_SRC_HTTP_TRANSPORT_H_
#define ITERICL_SRC_HTTP_TRANSPORT_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "itericl/http_backend.h"

namespace itericl::internal {

struct HttpEndpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path_prefix;       // "/v1", or empty
};

absl::StatusOr<HttpEndpoint> ParseEndpoint(std::string_view url);

struct PostOptions {
  std::chrono::milliseconds timeout{60000};
  std::optional<std::string> bearer_token;
  RetryPolicy retry;
};

// POSTs a JSON body to endpoint + path and returns the 2xx response body.
// Failures carry a BackendErrorKind payload.
absl::StatusOr<std::string> PostJson(const HttpEndpoint& endpoint,
                                     std::string_view path,
                                     const std::string& body,
                                     const PostOptions& options);

}  // namespace itericl::internal

#endif  // ITERICL_SRC_HTTP_TRANSPORT_H_
