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

#include "itericl/embedding.h"

#include <cstdlib>

#include "absl/strings/str_cat.h"
#include "http_transport.h"
#include "itericl/status_macros.h"
#include "json.hpp"

namespace itericl {

using json = nlohmann::json;

absl::StatusOr<EmbeddingPair> FixtureEmbeddingClient::Embed(
    std::string_view text, std::string_view video_ref) {
  ++calls_;
  auto t = text_.find(std::string(text));
  if (t == text_.end()) {
    return absl::NotFoundError(absl::StrCat("no fixture embedding for text \"", std::string(text), "\""));
  }
  auto v = video_.find(std::string(video_ref));
  if (v == video_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no fixture embedding for video \"", std::string(video_ref), "\""));
  }
  return EmbeddingPair{t->second, v->second};
}

absl::StatusOr<std::unique_ptr<HttpEmbeddingClient>> HttpEmbeddingClient::Create(
    HttpEmbeddingConfig config) {
  RETURN_IF_ERROR(internal::ParseEndpoint(config.endpoint).status());
  if (config.text_model.empty() || config.video_model.empty()) {
    return absl::InvalidArgumentError(
        "embedding client needs text and video model names");
  }
  if (!config.api_key) {
    if (const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str())) {
      config.api_key = key;
    }
  }
  return std::unique_ptr<HttpEmbeddingClient>(
      new HttpEmbeddingClient(std::move(config)));
}

absl::StatusOr<EmbeddingVector> HttpEmbeddingClient::EmbedOne(
    const std::string& model, std::string_view input) {
  ASSIGN_OR_RETURN(internal::HttpEndpoint endpoint,
                   internal::ParseEndpoint(config_.endpoint));
  const json body = {{"model", model}, {"input", json::array({std::string(input)})}};
  internal::PostOptions options{.timeout = config_.timeout,
                                .bearer_token = config_.api_key,
                                .retry = config_.retry};
  auto response = internal::PostJson(endpoint, "/embeddings", body.dump(), options);
  if (!response.ok()) {
    return absl::UnavailableError(absl::StrCat("embedding service unavailable: ",
                                               response.status().message()));
  }
  json doc = json::parse(*response, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array() ||
      doc["data"].empty() || !doc["data"][0].contains("embedding") ||
      !doc["data"][0]["embedding"].is_array()) {
    return absl::DataLossError("embedding response has no data[0].embedding");
  }
  std::vector<double> values;
  for (const json& v : doc["data"][0]["embedding"]) {
    if (!v.is_number()) return absl::DataLossError("embedding entries must be numbers");
    values.push_back(v.get<double>());
  }
  return EmbeddingVector::Create(std::move(values));
}

absl::StatusOr<EmbeddingPair> HttpEmbeddingClient::Embed(
    std::string_view text, std::string_view video_ref) {
  ASSIGN_OR_RETURN(EmbeddingVector t, EmbedOne(config_.text_model, text));
  ASSIGN_OR_RETURN(EmbeddingVector v, EmbedOne(config_.video_model, video_ref));
  return EmbeddingPair{std::move(t), std::move(v)};
}

absl::Status EnsureQueryEmbeddings(Query& query, EmbeddingClient* client,
                                   const ExampleStore& store) {
  if (!query.has_embeddings()) {
    if (client == nullptr) {
      return absl::FailedPreconditionError(absl::StrCat(
          "query \"", query.id,
          "\" has no embeddings and no embedding service is configured"));
    }
    ASSIGN_OR_RETURN(EmbeddingPair pair, client->Embed(query.question, query.video_ref));
    if (pair.text.dim() != store.text_dim() ||
        pair.video.dim() != store.video_dim()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "embedding dimension mismatch for query \"", query.id, "\": service returned (",
          pair.text.dim(), ", ", pair.video.dim(), "), store has (",
          store.text_dim(), ", ", store.video_dim(), ")"));
    }
    query.text_embedding = std::move(pair.text);
    query.video_embedding = std::move(pair.video);
  }
  return store.CheckQuery(query);
}

}  // namespace itericl
