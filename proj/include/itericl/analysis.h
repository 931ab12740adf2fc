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

#ifndef ITERICL_ANALYSIS_H_
#define ITERICL_ANALYSIS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "itericl/inference_engine.h"
#include "itericl/mock_backends.h"

namespace itericl {

// Expected-accuracy model of confidence-gated iteration. Each iteration
// answers correctly with probability p_c; the gate accepts a correct answer
// with probability tpr and an incorrect one with probability fpr, all
// independently across iterations.
struct AnalysisParams {
  double p_c = 0.5;
  double tpr = 0.9;
  double fpr = 0.1;

  absl::Status Validate() const;
};

// p_u = 1 - (p_c * tpr + (1 - p_c) * fpr): probability the loop continues.
double ContinueProbability(const AnalysisParams& params);

// Accuracy with at most n iterations when an unterminated run returns the
// n-th answer:
//   a(n) = p_c tpr (1 - p_u^(n-1)) / (1 - p_u) + p_u^(n-1) p_c,
// with a(n) = p_c when p_u = 1.
absl::StatusOr<double> ExpectedAccuracy(const AnalysisParams& params, int n);

// The variant whose geometric sum runs to n (one term more than the process
// produces); a(1) = p_c tpr + p_c. Kept for comparison only.
absl::StatusOr<double> ExpectedAccuracyAsPrinted(const AnalysisParams& params,
                                                 int n);

struct AsymptoticResult {
  double value = 0.0;
  // Set when tpr = 0 with 0 < p_c < 1: no correct answer is ever accepted.
  bool degenerate = false;
};

// lim a(n) = 1 / (1 + (fpr / tpr) (1 - p_c) / p_c), evaluated as
// p_c tpr / (p_c tpr + (1 - p_c) fpr).
absl::StatusOr<AsymptoticResult> AsymptoticAccuracy(const AnalysisParams& params);

// Gate used by the argmax-confidence simulation: confidences drawn from
// `correct` / `incorrect` and accepted when > threshold.
struct ConfidenceModel {
  ConfidenceDistribution correct;
  ConfidenceDistribution incorrect;
  double threshold = 0.5;

  // Split-uniform confidences around 0.5 whose acceptance rates equal
  // params.tpr and params.fpr exactly.
  static ConfidenceModel MatchingRates(const AnalysisParams& params);
};

struct ProcessOutcome {
  std::optional<int> terminated_at;
  bool correct = false;
  OutputPolicy policy = OutputPolicy::kLastAnswer;
};

// One run of the iteration process with at most n iterations. Under
// kArgmaxConfidence `model` supplies confidences; under kLastAnswer the gate
// is Bernoulli(tpr / fpr) and `model` is ignored.
ProcessOutcome SimulateProcess(const AnalysisParams& params, int n,
                               OutputPolicy policy, const ConfidenceModel& model,
                               std::mt19937_64& rng);

struct MonteCarloConfig {
  int64_t trials = 100000;
  std::uint64_t seed = 0;
  OutputPolicy policy = OutputPolicy::kLastAnswer;
  // Defaults to ConfidenceModel::MatchingRates(params).
  std::optional<ConfidenceModel> confidence_model;
  int workers = 1;
};

struct MonteCarloEstimate {
  int n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  int64_t correct = 0;
  int64_t trials = 0;
};

// Trials are split into fixed-size partitions seeded by (seed, partition), so
// the estimate does not depend on `workers`.
absl::StatusOr<MonteCarloEstimate> MonteCarloAccuracy(
    const AnalysisParams& params, int n, const MonteCarloConfig& config);

// Estimates for every horizon 1..max_n from one set of simulated runs.
absl::StatusOr<std::vector<MonteCarloEstimate>> MonteCarloCurve(
    const AnalysisParams& params, int max_n, const MonteCarloConfig& config);

struct SweepRow {
  AnalysisParams params;
  int n = 0;
  double closed_form = 0.0;
  double printed_form = 0.0;
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
};

// Closed form for every (params, n) cell, n in [n_min, n_max]; with `mc`
// set, also Monte Carlo estimates (cell seeds derived from mc->seed).
absl::StatusOr<std::vector<SweepRow>> Sweep(
    std::span<const AnalysisParams> grid, int n_min, int n_max,
    const std::optional<MonteCarloConfig>& mc);

// CSV with header "n,closed_form,mc_estimate,mc_stderr", preceded by
// "p_c,tpr,fpr" columns when `with_params` is set.
void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows,
                   bool with_params);

}  // namespace itericl

#endif  // ITERICL_ANALYSIS_H_
