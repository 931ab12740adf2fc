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

#ifndef ITERICL_MOCK_BACKENDS_H_
#define ITERICL_MOCK_BACKENDS_H_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "itericl/backend.h"

namespace itericl {

// Per query id, the outputs returned by successive Generate calls (answers
// and confidence probes alike consume one entry each).
using MockScript = absl::flat_hash_map<std::string, std::vector<GenerationOutput>>;

// JSON: {"<query id>": [{"answer": "...", "token_probs": [...]}, ...], ...}
absl::StatusOr<MockScript> ParseMockScript(std::string_view json_text);
absl::StatusOr<MockScript> LoadMockScript(const std::filesystem::path& path);

class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(MockScript script) : script_(std::move(script)) {}

  std::string name() const override { return "scripted"; }
  absl::StatusOr<GenerationOutput> Generate(
      const GenerationRequest& request) override;

  // Number of entries consumed so far for `query_id`.
  std::size_t consumed(std::string_view query_id) const;

 private:
  MockScript script_;
  mutable std::mutex mu_;
  absl::flat_hash_map<std::string, std::size_t> cursor_;
};

// Distribution of latent confidence values over (0, 1].
class ConfidenceDistribution {
 public:
  enum class Kind { kUniform, kBeta, kSplitUniform };

  // Uniform on (lo, hi], 0 <= lo < hi <= 1.
  static ConfidenceDistribution Uniform(double lo, double hi);
  // Beta(a, b), a, b > 0.
  static ConfidenceDistribution Beta(double a, double b);
  // With probability p_above uniform on (threshold, 1], otherwise uniform on
  // (0, threshold]. Gives exact gate acceptance rates at `threshold`.
  static ConfidenceDistribution SplitUniform(double threshold, double p_above);

  absl::Status Validate() const;
  double Sample(std::mt19937_64& rng) const;
  // P(X > threshold).
  double ProbabilityAbove(double threshold) const;

  Kind kind() const { return kind_; }
  double first() const { return first_; }
  double second() const { return second_; }

 private:
  ConfidenceDistribution(Kind kind, double first, double second)
      : kind_(kind), first_(first), second_(second) {}

  Kind kind_;
  double first_;
  double second_;
};

struct StochasticMockParams {
  // Probability that a generated answer is correct.
  double p_c = 0.5;
  ConfidenceDistribution conf_correct = ConfidenceDistribution::Beta(8.0, 2.0);
  ConfidenceDistribution conf_incorrect = ConfidenceDistribution::Beta(2.0, 8.0);
  std::uint64_t seed = 0;
  // Wrong answers are drawn from "wrong-1" .. "wrong-<num_distractors>".
  int num_distractors = 3;
  int tokens_per_answer = 3;
  // Confidence probes are answered "Yes" iff the latent confidence of the
  // query's latest answer exceeds this value.
  double probe_threshold = 0.5;

  absl::Status Validate() const;
  // Gate acceptance rates of a threshold test "confidence > c_th".
  double TruePositiveRate(double c_th) const {
    return conf_correct.ProbabilityAbove(c_th);
  }
  double FalsePositiveRate(double c_th) const {
    return conf_incorrect.ProbabilityAbove(c_th);
  }
};

// Answers correctly (with the query's gold answer) with probability p_c,
// independently per call. The minimum token probability of each answer
// equals its latent confidence. Draws depend only on (seed, query id, call
// index), so results do not depend on thread interleaving across queries.
class StochasticBackend final : public Backend {
 public:
  static absl::StatusOr<std::unique_ptr<StochasticBackend>> Create(
      StochasticMockParams params,
      absl::flat_hash_map<std::string, std::string> gold_answers);

  std::string name() const override { return "stochastic"; }
  absl::StatusOr<GenerationOutput> Generate(
      const GenerationRequest& request) override;

 private:
  struct QueryState {
    std::uint64_t calls = 0;
    double last_confidence = 0.0;
  };

  StochasticBackend(StochasticMockParams params,
                    absl::flat_hash_map<std::string, std::string> golds)
      : params_(std::move(params)), golds_(std::move(golds)) {}

  StochasticMockParams params_;
  absl::flat_hash_map<std::string, std::string> golds_;
  std::mutex mu_;
  absl::flat_hash_map<std::string, QueryState> state_;
};

}  // namespace itericl

#endif  // ITERICL_MOCK_BACKENDS_H_
