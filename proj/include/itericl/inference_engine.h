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

#ifndef ITERICL_INFERENCE_ENGINE_H_
#define ITERICL_INFERENCE_ENGINE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "itericl/backend.h"
#include "itericl/confidence.h"
#include "itericl/example_store.h"

namespace itericl {

enum class OutputPolicy {
  // Answer of the most confident iteration (first one on ties).
  kArgmaxConfidence,
  // Answer of the final iteration run.
  kLastAnswer,
};

std::string_view OutputPolicyName(OutputPolicy policy);
// Accepts "argmax", "argmax_confidence", "last" and "last_answer".
absl::StatusOr<OutputPolicy> ParseOutputPolicy(std::string_view name);

enum class Strategy { kZeroShot, kVideoIcl, kSimRankOnce, kRandExVote, kSimRankVote };

std::string_view StrategyName(Strategy strategy);
absl::StatusOr<Strategy> ParseStrategy(std::string_view name);

struct IterationConfig {
  // Total examples retrieved.
  int k = 8;
  // Examples shown per iteration.
  int m = 2;
  // The loop stops once a confidence strictly exceeds this.
  double c_th = 0.5;
  OutputPolicy output_policy = OutputPolicy::kArgmaxConfidence;

  absl::Status Validate() const;
  // ceil(k / m).
  int max_iterations() const { return (k + m - 1) / m; }
};

struct IterationRecord {
  int index = 0;  // 1-based
  std::vector<std::string> example_ids;
  std::string answer;
  std::vector<double> token_probs;
  double confidence = 0.0;
  // The confidence gate fired while iterations were still left.
  bool terminated_early = false;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct InferenceTrace {
  std::string query_id;
  std::string strategy;
  std::vector<IterationRecord> records;
  std::string final_answer;
  double final_confidence = 0.0;
  std::optional<std::uint64_t> seed;
  // Non-OK when a backend call failed; `records` then holds the iterations
  // completed before the failure.
  absl::Status status;
};

// Everything a strategy needs besides the query. All members are shared
// read-only (backends are internally synchronized).
struct EngineContext {
  const ExampleStore& store;
  Backend& backend;
  const ConfidenceEstimator& estimator;
  TemplateConfig tmpl;
};

// Confidence-gated iteration: retrieve the top-k examples, feed them m at a
// time, stop at the first confidence > c_th or when the ranked list is
// exhausted, then answer according to `it.output_policy`. Requires
// sel.k == it.k.
absl::StatusOr<InferenceTrace> RunVideoIcl(const Query& query,
                                           const EngineContext& ctx,
                                           const SelectionConfig& sel,
                                           const IterationConfig& it);

// A single generation with the top-m ranked examples.
absl::StatusOr<InferenceTrace> RunSimRankOnce(const Query& query,
                                              const EngineContext& ctx,
                                              const SelectionConfig& sel, int m);

// ceil(k/m) generations, each with m examples drawn uniformly without
// replacement from the pool (whole pool when smaller than m), answered by
// majority vote. Draws depend only on (seed, query id).
absl::StatusOr<InferenceTrace> RunRandExVote(const Query& query,
                                             const EngineContext& ctx,
                                             const SelectionConfig& sel,
                                             const IterationConfig& it,
                                             std::uint64_t seed);

// Ranked batches as in RunVideoIcl, but every batch runs and the answer is
// chosen by majority vote.
absl::StatusOr<InferenceTrace> RunSimRankVote(const Query& query,
                                              const EngineContext& ctx,
                                              const SelectionConfig& sel,
                                              const IterationConfig& it);

// One generation without demonstrations.
absl::StatusOr<InferenceTrace> RunZeroShot(const Query& query,
                                           const EngineContext& ctx);

absl::StatusOr<InferenceTrace> RunStrategy(Strategy strategy, const Query& query,
                                           const EngineContext& ctx,
                                           const SelectionConfig& sel,
                                           const IterationConfig& it,
                                           std::uint64_t seed);

struct VoteCandidate {
  std::string answer;
  double confidence = 0.0;
};

struct VoteResult {
  // Raw text of the earliest answer in the winning group.
  std::string answer;
  // Highest confidence within the winning group.
  double confidence = 0.0;
  // 0-based position of that earliest answer.
  std::size_t position = 0;
};

// Most frequent answer after normalization. Ties go to the group holding the
// highest single confidence, then to the group seen first.
absl::StatusOr<VoteResult> MajorityVote(std::span<const VoteCandidate> candidates);

}  // namespace itericl

#endif  // ITERICL_INFERENCE_ENGINE_H_
