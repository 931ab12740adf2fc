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

#ifndef ITERICL_EXAMPLE_STORE_H_
#define ITERICL_EXAMPLE_STORE_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace itericl {

// Fixed-length real vector produced by a text or video encoder. Every entry
// is finite and the vector is nonempty; the Euclidean norm is cached.
class EmbeddingVector {
 public:
  static absl::StatusOr<EmbeddingVector> Create(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double norm() const { return norm_; }

  friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
    return a.values_ == b.values_;
  }

 private:
  explicit EmbeddingVector(std::vector<double> values, double norm)
      : values_(std::move(values)), norm_(norm) {}

  std::vector<double> values_;
  double norm_ = 0.0;
};

struct CosineResult {
  double value = 0.0;
  // Set when either operand has zero norm; `value` is then 0.
  bool zero_norm = false;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Dimension mismatch is an error.
absl::StatusOr<CosineResult> CosineSimilarity(const EmbeddingVector& a,
                                              const EmbeddingVector& b);

struct Demonstration {
  std::string id;
  std::string question;
  std::string answer;
  std::string video_ref;
  EmbeddingVector text_embedding;
  EmbeddingVector video_embedding;
  std::size_t ingest_index = 0;
};

struct Query {
  std::string id;
  std::string question;
  std::string video_ref;
  // Absent when the query file carries no precomputed embeddings; they must
  // then be filled by an EmbeddingClient before selection.
  std::optional<EmbeddingVector> text_embedding;
  std::optional<EmbeddingVector> video_embedding;
  std::optional<std::string> gold_answer;

  bool has_embeddings() const {
    return text_embedding.has_value() && video_embedding.has_value();
  }
};

struct SelectionConfig {
  // Weight of the text similarity; the video similarity gets 1 - alpha.
  double alpha = 0.5;
  int k = 8;
  absl::flat_hash_set<std::string> exclude_ids;

  absl::Status Validate() const;
};

struct RankedExample {
  std::string demonstration_id;
  double score = 0.0;
  int rank = 0;  // 1-based
  std::size_t ingest_index = 0;
};

// Immutable demonstration pool. Safe for concurrent reads.
class ExampleStore {
 public:
  // Assigns ingest_index in vector order. Rejects duplicate ids and
  // embedding dimensions that differ within a modality.
  static absl::StatusOr<ExampleStore> Create(std::vector<Demonstration> demos);

  std::size_t size() const { return demos_.size(); }
  bool empty() const { return demos_.empty(); }
  std::size_t text_dim() const { return text_dim_; }
  std::size_t video_dim() const { return video_dim_; }

  std::span<const Demonstration> demonstrations() const { return demos_; }
  const Demonstration& at(std::size_t ingest_index) const {
    return demos_.at(ingest_index);
  }
  const Demonstration* Find(std::string_view id) const;

  // Checks that the query carries embeddings matching this store's dims.
  absl::Status CheckQuery(const Query& query) const;

 private:
  ExampleStore() = default;

  std::vector<Demonstration> demos_;
  absl::flat_hash_map<std::string, std::size_t> by_id_;
  std::size_t text_dim_ = 0;
  std::size_t video_dim_ = 0;
};

struct StoreStats {
  std::size_t count = 0;
  std::size_t text_dim = 0;
  std::size_t video_dim = 0;
  std::size_t zero_norm_text = 0;
  std::size_t zero_norm_video = 0;
};

StoreStats ComputeStoreStats(const ExampleStore& store);

// alpha * cos(text) + (1 - alpha) * cos(video).
absl::StatusOr<double> CombinedSimilarity(const Query& query,
                                          const Demonstration& demo,
                                          double alpha);

// The min(k, |pool| - |excluded|) demonstrations with the largest combined
// similarity, best first. Equal scores are ordered by ascending ingest_index.
absl::StatusOr<std::vector<RankedExample>> SelectRelevantK(
    const ExampleStore& store, const Query& query, const SelectionConfig& cfg);

// JSON Lines pool/query files. Blank lines are skipped; errors name the
// 1-based line number.
absl::StatusOr<ExampleStore> ParsePool(std::istream& in);
absl::StatusOr<ExampleStore> IngestPool(const std::filesystem::path& path);
absl::StatusOr<std::vector<Query>> ParseQueries(std::istream& in);
absl::StatusOr<std::vector<Query>> LoadQueries(
    const std::filesystem::path& path);

}  // namespace itericl

#endif  // ITERICL_EXAMPLE_STORE_H_
