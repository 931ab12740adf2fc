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

#include "itericl/example_store.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "itericl/status_macros.h"
#include "json.hpp"
#include "spdlog/spdlog.h"

namespace itericl {
namespace {

using json = nlohmann::json;

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// Shared by CosineSimilarity and the selection scan so both produce the
// same bits for the same operands.
CosineResult CosineUnchecked(const EmbeddingVector& a,
                             const EmbeddingVector& b) {
  if (a.norm() == 0.0 || b.norm() == 0.0) return {0.0, true};
  const double value = Dot(a.values(), b.values()) / (a.norm() * b.norm());
  return {std::clamp(value, -1.0, 1.0), false};
}

absl::StatusOr<std::string> RequireString(const json& obj,
                                          std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return absl::InvalidArgumentError(absl::StrCat("missing field \"", std::string(key), "\""));
  }
  if (!it->is_string()) {
    return absl::InvalidArgumentError(
        absl::StrCat("field \"", std::string(key), "\" must be a string"));
  }
  return it->get<std::string>();
}

absl::StatusOr<EmbeddingVector> ParseEmbedding(const json& value,
                                               std::string_view key) {
  if (!value.is_array()) {
    return absl::InvalidArgumentError(
        absl::StrCat("field \"", std::string(key), "\" must be an array of numbers"));
  }
  std::vector<double> values;
  values.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) {
      return absl::InvalidArgumentError(
          absl::StrCat("field \"", std::string(key), "\" must be an array of numbers"));
    }
    values.push_back(v.get<double>());
  }
  auto embedding = EmbeddingVector::Create(std::move(values));
  if (!embedding.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("field \"", std::string(key), "\": ", embedding.status().message()));
  }
  return embedding;
}

absl::StatusOr<EmbeddingVector> RequireEmbedding(const json& obj,
                                                 std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return absl::InvalidArgumentError(absl::StrCat("missing field \"", std::string(key), "\""));
  }
  return ParseEmbedding(*it, key);
}

absl::StatusOr<Demonstration> ParseDemonstration(const json& obj) {
  if (!obj.is_object()) return absl::InvalidArgumentError("expected a JSON object");
  ASSIGN_OR_RETURN(std::string id, RequireString(obj, "id"));
  ASSIGN_OR_RETURN(std::string question, RequireString(obj, "question"));
  ASSIGN_OR_RETURN(std::string answer, RequireString(obj, "answer"));
  ASSIGN_OR_RETURN(std::string video, RequireString(obj, "video"));
  ASSIGN_OR_RETURN(EmbeddingVector text, RequireEmbedding(obj, "text_embedding"));
  ASSIGN_OR_RETURN(EmbeddingVector vid, RequireEmbedding(obj, "video_embedding"));
  return Demonstration{.id = std::move(id),
                       .question = std::move(question),
                       .answer = std::move(answer),
                       .video_ref = std::move(video),
                       .text_embedding = std::move(text),
                       .video_embedding = std::move(vid)};
}

absl::StatusOr<Query> ParseQuery(const json& obj) {
  if (!obj.is_object()) return absl::InvalidArgumentError("expected a JSON object");
  Query query;
  ASSIGN_OR_RETURN(query.id, RequireString(obj, "id"));
  ASSIGN_OR_RETURN(query.question, RequireString(obj, "question"));
  ASSIGN_OR_RETURN(query.video_ref, RequireString(obj, "video"));
  const bool has_text = obj.contains("text_embedding");
  const bool has_video = obj.contains("video_embedding");
  if (has_text != has_video) {
    return absl::InvalidArgumentError(
        "text_embedding and video_embedding must be given together");
  }
  if (has_text) {
    ASSIGN_OR_RETURN(query.text_embedding,
                     ParseEmbedding(obj.at("text_embedding"), "text_embedding"));
    ASSIGN_OR_RETURN(query.video_embedding,
                     ParseEmbedding(obj.at("video_embedding"), "video_embedding"));
  }
  if (auto it = obj.find("gold_answer"); it != obj.end() && !it->is_null()) {
    if (it->is_string()) {
      query.gold_answer = it->get<std::string>();
    } else if (it->is_array() && !it->empty() && it->front().is_string()) {
      // Multi-reference golds: the first reference is the primary answer.
      query.gold_answer = it->front().get<std::string>();
    } else {
      return absl::InvalidArgumentError(
          "field \"gold_answer\" must be a string or array of strings");
    }
  }
  return query;
}

// Calls `fn(json, line_number)` for each nonblank line.
template <typename Fn>
absl::Status ForEachJsonLine(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json parsed = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": malformed JSON"));
    }
    absl::Status status = fn(parsed, line_no);
    if (!status.ok()) {
      return absl::Status(status.code(), absl::StrCat("line ", line_no, ": ",
                                                      status.message()));
    }
  }
  if (in.bad()) return absl::DataLossError("read error");
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<EmbeddingVector> EmbeddingVector::Create(
    std::vector<double> values) {
  if (values.empty()) {
    return absl::InvalidArgumentError("embedding must have positive dimension");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("embedding entry ", i, " is not finite"));
    }
  }
  const double norm = std::sqrt(Dot(values, values));
  return EmbeddingVector(std::move(values), norm);
}

absl::StatusOr<CosineResult> CosineSimilarity(const EmbeddingVector& a,
                                              const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "embedding dimension mismatch: ", a.dim(), " vs ", b.dim()));
  }
  CosineResult result = CosineUnchecked(a, b);
  if (result.zero_norm) {
    spdlog::warn("cosine similarity of a zero-norm embedding; using 0");
  }
  return result;
}

absl::Status SelectionConfig::Validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in [0, 1], got ", alpha));
  }
  if (k < 1) {
    return absl::InvalidArgumentError(absl::StrCat("k must be >= 1, got ", k));
  }
  return absl::OkStatus();
}

absl::StatusOr<ExampleStore> ExampleStore::Create(
    std::vector<Demonstration> demos) {
  ExampleStore store;
  store.by_id_.reserve(demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    Demonstration& demo = demos[i];
    demo.ingest_index = i;
    if (i == 0) {
      store.text_dim_ = demo.text_embedding.dim();
      store.video_dim_ = demo.video_embedding.dim();
    } else if (demo.text_embedding.dim() != store.text_dim_) {
      return absl::InvalidArgumentError(absl::StrCat(
          "demonstration \"", demo.id, "\": text embedding dimension ",
          demo.text_embedding.dim(), " differs from store dimension ",
          store.text_dim_));
    } else if (demo.video_embedding.dim() != store.video_dim_) {
      return absl::InvalidArgumentError(absl::StrCat(
          "demonstration \"", demo.id, "\": video embedding dimension ",
          demo.video_embedding.dim(), " differs from store dimension ",
          store.video_dim_));
    }
    if (!store.by_id_.emplace(demo.id, i).second) {
      return absl::AlreadyExistsError(
          absl::StrCat("duplicate demonstration id \"", demo.id, "\""));
    }
  }
  store.demos_ = std::move(demos);
  return store;
}

const Demonstration* ExampleStore::Find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &demos_[it->second];
}

absl::Status ExampleStore::CheckQuery(const Query& query) const {
  if (!query.has_embeddings()) {
    return absl::FailedPreconditionError(
        absl::StrCat("query \"", query.id, "\" has no embeddings"));
  }
  if (query.text_embedding->dim() != text_dim_ ||
      query.video_embedding->dim() != video_dim_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "query \"", query.id, "\" embedding dims (",
        query.text_embedding->dim(), ", ", query.video_embedding->dim(),
        ") do not match store dims (", text_dim_, ", ", video_dim_, ")"));
  }
  return absl::OkStatus();
}

StoreStats ComputeStoreStats(const ExampleStore& store) {
  StoreStats stats{.count = store.size(),
                   .text_dim = store.text_dim(),
                   .video_dim = store.video_dim()};
  for (const Demonstration& d : store.demonstrations()) {
    if (d.text_embedding.norm() == 0.0) ++stats.zero_norm_text;
    if (d.video_embedding.norm() == 0.0) ++stats.zero_norm_video;
  }
  return stats;
}

absl::StatusOr<double> CombinedSimilarity(const Query& query,
                                          const Demonstration& demo,
                                          double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in [0, 1], got ", alpha));
  }
  if (!query.has_embeddings()) {
    return absl::FailedPreconditionError(
        absl::StrCat("query \"", query.id, "\" has no embeddings"));
  }
  ASSIGN_OR_RETURN(CosineResult text,
                   CosineSimilarity(*query.text_embedding, demo.text_embedding));
  ASSIGN_OR_RETURN(CosineResult video, CosineSimilarity(*query.video_embedding,
                                                        demo.video_embedding));
  return alpha * text.value + (1.0 - alpha) * video.value;
}

absl::StatusOr<std::vector<RankedExample>> SelectRelevantK(
    const ExampleStore& store, const Query& query, const SelectionConfig& cfg) {
  RETURN_IF_ERROR(cfg.Validate());
  if (store.empty()) return absl::FailedPreconditionError("example pool is empty");
  RETURN_IF_ERROR(store.CheckQuery(query));

  struct Scored {
    double score;
    std::size_t index;
  };
  std::vector<Scored> scored;
  scored.reserve(store.size());
  std::size_t zero_norm = 0;
  for (const Demonstration& demo : store.demonstrations()) {
    if (!cfg.exclude_ids.empty() && cfg.exclude_ids.contains(demo.id)) continue;
    const CosineResult text =
        CosineUnchecked(*query.text_embedding, demo.text_embedding);
    const CosineResult video =
        CosineUnchecked(*query.video_embedding, demo.video_embedding);
    if (text.zero_norm || video.zero_norm) ++zero_norm;
    scored.push_back(
        {cfg.alpha * text.value + (1.0 - cfg.alpha) * video.value,
         demo.ingest_index});
  }
  if (scored.empty()) {
    return absl::FailedPreconditionError(
        "example pool is empty after exclusions");
  }
  if (zero_norm > 0) {
    spdlog::warn("query \"{}\": {} demonstration(s) scored with a zero-norm "
                 "embedding",
                 query.id, zero_norm);
  }

  const std::size_t k =
      std::min(static_cast<std::size_t>(cfg.k), scored.size());
  auto better = [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);

  std::vector<RankedExample> ranked;
  ranked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    ranked.push_back({.demonstration_id = store.at(scored[i].index).id,
                      .score = scored[i].score,
                      .rank = static_cast<int>(i + 1),
                      .ingest_index = scored[i].index});
  }
  return ranked;
}

absl::StatusOr<ExampleStore> ParsePool(std::istream& in) {
  std::vector<Demonstration> demos;
  RETURN_IF_ERROR(ForEachJsonLine(in, [&](const json& obj, std::size_t) {
    auto demo = ParseDemonstration(obj);
    if (!demo.ok()) return demo.status();
    demos.push_back(*std::move(demo));
    return absl::OkStatus();
  }));
  return ExampleStore::Create(std::move(demos));
}

absl::StatusOr<ExampleStore> IngestPool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open pool file ", path.string()));
  }
  auto store = ParsePool(in);
  if (!store.ok()) {
    return absl::Status(store.status().code(),
                        absl::StrCat(path.string(), ": ", store.status().message()));
  }
  return store;
}

absl::StatusOr<std::vector<Query>> ParseQueries(std::istream& in) {
  std::vector<Query> queries;
  absl::flat_hash_set<std::string> seen;
  RETURN_IF_ERROR(ForEachJsonLine(in, [&](const json& obj, std::size_t) {
    auto query = ParseQuery(obj);
    if (!query.ok()) return query.status();
    if (!seen.insert(query->id).second) {
      return absl::AlreadyExistsError(
          absl::StrCat("duplicate query id \"", query->id, "\""));
    }
    queries.push_back(*std::move(query));
    return absl::OkStatus();
  }));
  return queries;
}

absl::StatusOr<std::vector<Query>> LoadQueries(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open query file ", path.string()));
  }
  auto queries = ParseQueries(in);
  if (!queries.ok()) {
    return absl::Status(
        queries.status().code(),
        absl::StrCat(path.string(), ": ", queries.status().message()));
  }
  return queries;
}

}  // namespace itericl
