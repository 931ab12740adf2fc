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

#ifndef ITERICL_METRICS_H_
#define ITERICL_METRICS_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "itericl/answer_normalization.h"
#include "itericl/inference_engine.h"

namespace itericl {

enum class TaskKind { kMultipleChoice, kOpenEnded, kClassification, kCaptioning };

std::string_view TaskKindName(TaskKind kind);
absl::StatusOr<TaskKind> ParseTaskKind(std::string_view name);

struct EvalTask {
  TaskKind kind = TaskKind::kOpenEnded;
  NormalizationOptions normalization;

  // Option-letter extraction only for multiple choice.
  static EvalTask For(TaskKind kind);
};

struct ItemScore {
  std::string query_id;
  std::map<std::string, double> scores;
};

struct MetricReport {
  std::map<std::string, double> metrics;
  std::size_t sample_count = 0;
  std::vector<ItemScore> per_item;
};

// Query id -> reference answers (one or more).
using GoldMap = absl::flat_hash_map<std::string, std::vector<std::string>>;

// JSON Lines with "id" and "gold_answer" (string or array of strings); lines
// without a gold answer are skipped. Query files qualify.
absl::StatusOr<GoldMap> LoadGolds(const std::filesystem::path& path);

// Lowercase, split ASCII punctuation into separate tokens, split on
// whitespace.
std::vector<std::string> Tokenize(std::string_view text);

enum class BleuSmoothing {
  kNone,
  // Adds one to numerator and denominator of every order above 1.
  kAddOne,
};

struct BleuOptions {
  int max_n = 4;
  BleuSmoothing smoothing = BleuSmoothing::kNone;
};

struct BleuScores {
  // corpus[n - 1] is corpus-level BLEU-n.
  std::vector<double> corpus;
  // per_sentence[i][n - 1] is BLEU-n of pair i alone.
  std::vector<std::vector<double>> per_sentence;
  double brevity_penalty = 0.0;
};

// Corpus BLEU: clipped n-gram counts and lengths summed over the corpus,
// geometric mean of precisions 1..n, brevity penalty exp(1 - r/c) for c <= r
// with r the summed closest reference lengths. A zero precision at some
// order makes that order and all higher ones 0 unless smoothing is on.
absl::StatusOr<BleuScores> Bleu(std::span<const std::string> candidates,
                                std::span<const std::vector<std::string>> references,
                                const BleuOptions& options = {});

struct RougeLScores {
  double corpus = 0.0;
  std::vector<double> per_pair;
};

// LCS F-measure (beta = 1) per pair, max over references, averaged.
absl::StatusOr<RougeLScores> RougeL(
    std::span<const std::string> candidates,
    std::span<const std::vector<std::string>> references);

// Length of the longest common subsequence of two token sequences.
std::size_t LongestCommonSubsequence(std::span<const std::string> a,
                                     std::span<const std::string> b);

// Fraction of traces whose normalized final answer equals a normalized
// reference. Every trace needs a gold.
absl::StatusOr<MetricReport> ExactMatchAccuracy(
    std::span<const InferenceTrace> traces, const GoldMap& golds,
    const EvalTask& task);

// BLEU-1..4 and ROUGE-L of final answers against the references.
absl::StatusOr<MetricReport> CaptionMetrics(std::span<const InferenceTrace> traces,
                                            const GoldMap& golds,
                                            const BleuOptions& options = {});

// Exact match for QA/classification tasks, caption metrics for captioning.
absl::StatusOr<MetricReport> Evaluate(std::span<const InferenceTrace> traces,
                                      const GoldMap& golds, const EvalTask& task);

}  // namespace itericl

#endif  // ITERICL_METRICS_H_
