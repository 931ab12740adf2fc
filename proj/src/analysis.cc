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

#include "itericl/analysis.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "itericl/seeding.h"
#include "itericl/status_macros.h"

namespace itericl {
namespace {

constexpr int64_t kTrialsPerPartition = 1 << 16;

bool InUnit(double x) { return x >= 0.0 && x <= 1.0; }

double AcceptProbability(const AnalysisParams& p) {
  return p.p_c * p.tpr + (1.0 - p.p_c) * p.fpr;
}

bool Bernoulli(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// Accumulates, for every horizon n in 1..max_n, whether one simulated run
// with at most n iterations ends correct. Draws stop at the first accepted
// iteration, since no horizon looks past it.
void SimulateCurveTrial(const AnalysisParams& params, int max_n,
                        OutputPolicy policy, const ConfidenceModel& model,
                        std::mt19937_64& rng, std::vector<int64_t>& correct) {
  bool best_correct = false;
  double best_conf = -1.0;
  for (int i = 1; i <= max_n; ++i) {
    const bool is_correct = Bernoulli(rng, params.p_c);
    bool accepted;
    double conf = 0.0;
    if (policy == OutputPolicy::kLastAnswer) {
      accepted = Bernoulli(rng, is_correct ? params.tpr : params.fpr);
    } else {
      conf = is_correct ? model.correct.Sample(rng) : model.incorrect.Sample(rng);
      accepted = conf > model.threshold;
      if (conf > best_conf) {
        best_conf = conf;
        best_correct = is_correct;
      }
    }
    // Horizon n == i ends here either way.
    const bool horizon_correct =
        policy == OutputPolicy::kLastAnswer ? is_correct : best_correct;
    if (horizon_correct) ++correct[i - 1];
    if (accepted) {
      // Every longer horizon returns this accepted answer.
      if (is_correct) {
        for (int n = i + 1; n <= max_n; ++n) ++correct[n - 1];
      }
      return;
    }
  }
}

MonteCarloEstimate MakeEstimate(int n, int64_t correct, int64_t trials) {
  const double p = static_cast<double>(correct) / static_cast<double>(trials);
  return MonteCarloEstimate{.n = n,
                            .estimate = p,
                            .stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(trials)),
                            .correct = correct,
                            .trials = trials};
}

}  // namespace

absl::Status AnalysisParams::Validate() const {
  if (!InUnit(p_c) || !InUnit(tpr) || !InUnit(fpr)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "p_c, tpr and fpr must lie in [0, 1], got (", p_c, ", ", tpr, ", ", fpr, ")"));
  }
  return absl::OkStatus();
}

double ContinueProbability(const AnalysisParams& params) {
  return 1.0 - AcceptProbability(params);
}

absl::StatusOr<double> ExpectedAccuracy(const AnalysisParams& params, int n) {
  RETURN_IF_ERROR(params.Validate());
  if (n < 1) return absl::InvalidArgumentError(absl::StrCat("n must be >= 1, got ", n));
  const double accept = AcceptProbability(params);
  if (n == 1 || accept == 0.0) return params.p_c;
  // p_u^(n-1) and the geometric sum, written to stay accurate for p_u near 1.
  const double log_pu = std::log1p(-accept);
  const double pu_pow = std::exp((n - 1) * log_pu);
  const double geometric = -std::expm1((n - 1) * log_pu) / accept;
  return params.p_c * params.tpr * geometric + pu_pow * params.p_c;
}

absl::StatusOr<double> ExpectedAccuracyAsPrinted(const AnalysisParams& params,
                                                 int n) {
  RETURN_IF_ERROR(params.Validate());
  if (n < 1) return absl::InvalidArgumentError(absl::StrCat("n must be >= 1, got ", n));
  const double pu = ContinueProbability(params);
  const double sum = pu == 1.0 ? static_cast<double>(n)
                               : (1.0 - std::pow(pu, n)) / (1.0 - pu);
  return params.p_c * params.tpr * sum + std::pow(pu, n - 1) * params.p_c;
}

absl::StatusOr<AsymptoticResult> AsymptoticAccuracy(const AnalysisParams& params) {
  RETURN_IF_ERROR(params.Validate());
  if (params.p_c == 0.0) return AsymptoticResult{0.0, false};
  const double accept = AcceptProbability(params);
  if (accept == 0.0) {
    // The gate never fires, so every horizon returns a fresh answer.
    return AsymptoticResult{params.p_c, params.p_c < 1.0};
  }
  if (params.tpr == 0.0) return AsymptoticResult{0.0, params.p_c < 1.0};
  return AsymptoticResult{params.p_c * params.tpr / accept, false};
}

ConfidenceModel ConfidenceModel::MatchingRates(const AnalysisParams& params) {
  return ConfidenceModel{
      .correct = ConfidenceDistribution::SplitUniform(0.5, params.tpr),
      .incorrect = ConfidenceDistribution::SplitUniform(0.5, params.fpr),
      .threshold = 0.5};
}

ProcessOutcome SimulateProcess(const AnalysisParams& params, int n,
                               OutputPolicy policy, const ConfidenceModel& model,
                               std::mt19937_64& rng) {
  ProcessOutcome outcome{.policy = policy};
  bool best_correct = false;
  double best_conf = -1.0;
  for (int i = 1; i <= n; ++i) {
    const bool is_correct = Bernoulli(rng, params.p_c);
    bool accepted;
    if (policy == OutputPolicy::kLastAnswer) {
      accepted = Bernoulli(rng, is_correct ? params.tpr : params.fpr);
    } else {
      const double conf =
          is_correct ? model.correct.Sample(rng) : model.incorrect.Sample(rng);
      accepted = conf > model.threshold;
      if (conf > best_conf) {
        best_conf = conf;
        best_correct = is_correct;
      }
    }
    if (accepted) {
      outcome.terminated_at = i;
      outcome.correct = is_correct;
      return outcome;
    }
    if (i == n) {
      outcome.correct =
          policy == OutputPolicy::kLastAnswer ? is_correct : best_correct;
    }
  }
  return outcome;
}

absl::StatusOr<std::vector<MonteCarloEstimate>> MonteCarloCurve(
    const AnalysisParams& params, int max_n, const MonteCarloConfig& config) {
  RETURN_IF_ERROR(params.Validate());
  if (max_n < 1) {
    return absl::InvalidArgumentError(absl::StrCat("n must be >= 1, got ", max_n));
  }
  if (config.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  const ConfidenceModel model =
      config.confidence_model.value_or(ConfidenceModel::MatchingRates(params));
  if (config.policy == OutputPolicy::kArgmaxConfidence) {
    RETURN_IF_ERROR(model.correct.Validate());
    RETURN_IF_ERROR(model.incorrect.Validate());
  }

  const int64_t partitions =
      (config.trials + kTrialsPerPartition - 1) / kTrialsPerPartition;
  std::vector<std::vector<int64_t>> partial(
      partitions, std::vector<int64_t>(max_n, 0));
  std::atomic<int64_t> next{0};
  auto work = [&] {
    for (int64_t part = next++; part < partitions; part = next++) {
      std::mt19937_64 rng(DeriveSeed(config.seed, static_cast<std::uint64_t>(part)));
      const int64_t begin = part * kTrialsPerPartition;
      const int64_t end = std::min(config.trials, begin + kTrialsPerPartition);
      for (int64_t t = begin; t < end; ++t) {
        SimulateCurveTrial(params, max_n, config.policy, model, rng, partial[part]);
      }
    }
  };
  const int workers = static_cast<int>(
      std::clamp<int64_t>(config.workers, 1, partitions));
  {
    std::vector<std::jthread> threads;
    for (int w = 1; w < workers; ++w) threads.emplace_back(work);
    work();
  }

  std::vector<MonteCarloEstimate> curve;
  curve.reserve(max_n);
  for (int n = 1; n <= max_n; ++n) {
    int64_t correct = 0;
    for (const auto& counts : partial) correct += counts[n - 1];
    curve.push_back(MakeEstimate(n, correct, config.trials));
  }
  return curve;
}

absl::StatusOr<MonteCarloEstimate> MonteCarloAccuracy(
    const AnalysisParams& params, int n, const MonteCarloConfig& config) {
  ASSIGN_OR_RETURN(std::vector<MonteCarloEstimate> curve,
                   MonteCarloCurve(params, n, config));
  return curve.back();
}

absl::StatusOr<std::vector<SweepRow>> Sweep(
    std::span<const AnalysisParams> grid, int n_min, int n_max,
    const std::optional<MonteCarloConfig>& mc) {
  if (n_min < 1 || n_max < n_min) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid n range [", n_min, ", ", n_max, "]"));
  }
  std::vector<SweepRow> rows;
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    const AnalysisParams& params = grid[cell];
    std::vector<MonteCarloEstimate> curve;
    if (mc) {
      MonteCarloConfig cell_config = *mc;
      cell_config.seed = grid.size() == 1 ? mc->seed : DeriveSeed(mc->seed, cell);
      ASSIGN_OR_RETURN(curve, MonteCarloCurve(params, n_max, cell_config));
    }
    for (int n = n_min; n <= n_max; ++n) {
      SweepRow row{.params = params, .n = n};
      ASSIGN_OR_RETURN(row.closed_form, ExpectedAccuracy(params, n));
      ASSIGN_OR_RETURN(row.printed_form, ExpectedAccuracyAsPrinted(params, n));
      if (mc) {
        row.mc_estimate = curve[n - 1].estimate;
        row.mc_stderr = curve[n - 1].stderr_;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows,
                   bool with_params) {
  auto num = [](double v) { return absl::StrCat(v); };
  if (with_params) out << "p_c,tpr,fpr,";
  out << "n,closed_form,mc_estimate,mc_stderr\n";
  for (const SweepRow& row : rows) {
    if (with_params) {
      out << num(row.params.p_c) << ',' << num(row.params.tpr) << ','
          << num(row.params.fpr) << ',';
    }
    out << row.n << ',' << absl::StrFormat("%.17g", row.closed_form) << ','
        << (row.mc_estimate ? absl::StrFormat("%.17g", *row.mc_estimate) : "")
        << ','
        << (row.mc_stderr ? absl::StrFormat("%.17g", *row.mc_stderr) : "")
        << '\n';
  }
}

}  // namespace itericl
