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

#ifndef ITERICL_EMBEDDING_H_
#define ITERICL_EMBEDDING_H_

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "itericl/example_store.h"
#include "itericl/http_backend.h"

namespace itericl {

struct EmbeddingPair {
  EmbeddingVector text;
  EmbeddingVector video;
};

// Maps query text and a video reference to encoder outputs. The encoders
// themselves live outside this library.
class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual absl::StatusOr<EmbeddingPair> Embed(std::string_view text,
                                              std::string_view video_ref) = 0;
};

// Looks vectors up in fixed tables keyed by text and by video reference.
class FixtureEmbeddingClient final : public EmbeddingClient {
 public:
  FixtureEmbeddingClient(
      absl::flat_hash_map<std::string, EmbeddingVector> text_table,
      absl::flat_hash_map<std::string, EmbeddingVector> video_table)
      : text_(std::move(text_table)), video_(std::move(video_table)) {}

  absl::StatusOr<EmbeddingPair> Embed(std::string_view text,
                                      std::string_view video_ref) override;

  int calls() const { return calls_; }

 private:
  absl::flat_hash_map<std::string, EmbeddingVector> text_;
  absl::flat_hash_map<std::string, EmbeddingVector> video_;
  int calls_ = 0;
};

struct HttpEmbeddingConfig {
  // Requests go to {endpoint}/embeddings as {"model", "input": [...]} and
  // read data[0].embedding from the response.
  std::string endpoint;
  std::string text_model;
  std::string video_model;
  std::optional<std::string> api_key;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
};

class HttpEmbeddingClient final : public EmbeddingClient {
 public:
  static absl::StatusOr<std::unique_ptr<HttpEmbeddingClient>> Create(
      HttpEmbeddingConfig config);

  absl::StatusOr<EmbeddingPair> Embed(std::string_view text,
                                      std::string_view video_ref) override;

 private:
  explicit HttpEmbeddingClient(HttpEmbeddingConfig config)
      : config_(std::move(config)) {}

  absl::StatusOr<EmbeddingVector> EmbedOne(const std::string& model,
                                           std::string_view input);

  HttpEmbeddingConfig config_;
};

// Fills missing query embeddings through `client` and checks dims against
// the store. Queries that already carry embeddings never reach the client.
absl::Status EnsureQueryEmbeddings(Query& query, EmbeddingClient* client,
                                   const ExampleStore& store);

}  // namespace itericl

#endif  // ITERICL_EMBEDDING_H_
