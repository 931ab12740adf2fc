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

#ifndef ITERICL_BENCHMARK_H_
#define ITERICL_BENCHMARK_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "itericl/confidence.h"
#include "itericl/embedding.h"
#include "itericl/example_store.h"
#include "itericl/http_backend.h"
#include "itericl/inference_engine.h"
#include "itericl/metrics.h"
#include "itericl/mock_backends.h"
#include "json.hpp"

namespace itericl {

enum class BackendKind { kMock, kHttp };

// Settings that apply to every query of a run.
struct RunSettings {
  Strategy strategy = Strategy::kVideoIcl;
  SelectionConfig selection;
  IterationConfig iteration;
  EstimatorKind estimator = EstimatorKind::kMinTokenProb;
  TemplateConfig tmpl;
  // Keep a query's own id out of its demonstrations.
  bool exclude_self = false;
  std::uint64_t seed = 0;
  int workers = 1;

  absl::Status Validate() const;
};

struct RunConfig {
  std::filesystem::path store_path;
  std::filesystem::path query_path;
  BackendKind backend = BackendKind::kMock;
  // Mock backend: a script file, or else the stochastic mock.
  std::optional<std::filesystem::path> mock_script;
  StochasticMockParams stochastic;
  HttpBackendConfig http;
  // Needed only when the query file lacks embeddings.
  std::optional<HttpEmbeddingConfig> embedding;
  RunSettings settings;
  std::filesystem::path traces_out;
  std::optional<std::filesystem::path> report_out;
  TaskKind task = TaskKind::kOpenEnded;

  absl::Status Validate() const;
};

// Overlays keys of a JSON config object onto `config`. Unknown keys are
// errors. Relative paths are resolved against `base_dir`.
absl::Status ApplyRunConfigJson(const nlohmann::json& j,
                                const std::filesystem::path& base_dir,
                                RunConfig& config);
absl::Status LoadRunConfigFile(const std::filesystem::path& path, RunConfig& config);

struct IterationStats {
  std::size_t traces = 0;
  // Iteration index (1-based) of the most confident record -> trace count.
  std::map<int, std::size_t> argmax_iteration;
  // Number of iterations run -> trace count.
  std::map<int, std::size_t> iterations_run;
};

// Failed traces and traces without records are skipped.
IterationStats ComputeIterationStats(std::span<const InferenceTrace> traces);

struct BenchmarkResult {
  std::vector<InferenceTrace> traces;  // in query order
  std::optional<MetricReport> report;
  IterationStats stats;
  std::vector<std::string> failed_query_ids;
};

// Runs the configured strategy over `queries` on a bounded worker pool.
// Per-query failures are recorded in the trace, never abort the run.
BenchmarkResult RunQueries(std::span<const Query> queries, const ExampleStore& store,
                           Backend& backend, EmbeddingClient* embedder,
                           const RunSettings& settings);

// Loads inputs, builds the backend, runs, writes traces (and the report when
// configured). Queries with gold answers are scored with `config.task`.
absl::StatusOr<BenchmarkResult> RunBenchmark(const RunConfig& config);

nlohmann::ordered_json IterationStatsToJson(const IterationStats& stats);
nlohmann::ordered_json ReportToJson(const MetricReport& report, TaskKind task);

}  // namespace itericl

#endif  // ITERICL_BENCHMARK_H_
