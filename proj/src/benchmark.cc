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

#include "itericl/benchmark.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "absl/strings/str_cat.h"
#include "itericl/status_macros.h"
#include "itericl/trace_io.h"
#include "spdlog/spdlog.h"

namespace itericl {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool NeedsRanking(Strategy s) {
  return s == Strategy::kVideoIcl || s == Strategy::kSimRankOnce ||
         s == Strategy::kSimRankVote;
}

InferenceTrace FailedTrace(const Query& query, Strategy strategy, absl::Status status) {
  InferenceTrace trace{.query_id = query.id,
                       .strategy = std::string(StrategyName(strategy))};
  trace.status = std::move(status);
  return trace;
}

InferenceTrace RunOne(const Query& query, const ExampleStore& store, Backend& backend,
                      EmbeddingClient* embedder, const ConfidenceEstimator& estimator,
                      const RunSettings& settings) {
  Query local = query;
  if (NeedsRanking(settings.strategy)) {
    absl::Status status = EnsureQueryEmbeddings(local, embedder, store);
    if (!status.ok()) return FailedTrace(query, settings.strategy, status);
  }
  SelectionConfig sel = settings.selection;
  if (settings.exclude_self) sel.exclude_ids.insert(query.id);
  const EngineContext ctx{.store = store,
                          .backend = backend,
                          .estimator = estimator,
                          .tmpl = settings.tmpl};
  absl::StatusOr<InferenceTrace> trace = RunStrategy(
      settings.strategy, local, ctx, sel, settings.iteration, settings.seed);
  if (!trace.ok()) return FailedTrace(query, settings.strategy, trace.status());
  return *std::move(trace);
}

// Helpers for reading optional typed keys out of a config object.
template <typename T>
absl::Status Read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return absl::OkStatus();
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config key \"", key, "\": ", e.what()));
  }
  return absl::OkStatus();
}

absl::Status CheckKeys(const json& obj, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!obj.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat(std::string(where), " must be a JSON object"));
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key \"", key, "\" in ", std::string(where)));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ConfidenceDistribution> ParseDistribution(const json& obj) {
  RETURN_IF_ERROR(CheckKeys(obj, {"kind", "lo", "hi", "a", "b", "threshold", "p_above"},
                            "confidence distribution"));
  std::string kind;
  RETURN_IF_ERROR(Read(obj, "kind", kind));
  double x = 0.0, y = 0.0;
  if (kind == "uniform") {
    RETURN_IF_ERROR(Read(obj, "lo", x));
    RETURN_IF_ERROR(Read(obj, "hi", y));
    return ConfidenceDistribution::Uniform(x, y);
  }
  if (kind == "beta") {
    RETURN_IF_ERROR(Read(obj, "a", x));
    RETURN_IF_ERROR(Read(obj, "b", y));
    return ConfidenceDistribution::Beta(x, y);
  }
  if (kind == "split_uniform") {
    RETURN_IF_ERROR(Read(obj, "threshold", x));
    RETURN_IF_ERROR(Read(obj, "p_above", y));
    return ConfidenceDistribution::SplitUniform(x, y);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown confidence distribution kind \"", kind, "\""));
}

absl::Status ApplyStochastic(const json& obj, StochasticMockParams& params) {
  RETURN_IF_ERROR(CheckKeys(obj,
                            {"p_c", "tpr", "fpr", "gate_threshold", "correct",
                             "incorrect", "num_distractors", "tokens_per_answer",
                             "probe_threshold", "seed"},
                            "stochastic"));
  RETURN_IF_ERROR(Read(obj, "p_c", params.p_c));
  RETURN_IF_ERROR(Read(obj, "num_distractors", params.num_distractors));
  RETURN_IF_ERROR(Read(obj, "tokens_per_answer", params.tokens_per_answer));
  RETURN_IF_ERROR(Read(obj, "probe_threshold", params.probe_threshold));
  RETURN_IF_ERROR(Read(obj, "seed", params.seed));
  if (obj.contains("tpr") || obj.contains("fpr")) {
    double gate = 0.5, tpr = 0.9, fpr = 0.1;
    RETURN_IF_ERROR(Read(obj, "gate_threshold", gate));
    RETURN_IF_ERROR(Read(obj, "tpr", tpr));
    RETURN_IF_ERROR(Read(obj, "fpr", fpr));
    params.conf_correct = ConfidenceDistribution::SplitUniform(gate, tpr);
    params.conf_incorrect = ConfidenceDistribution::SplitUniform(gate, fpr);
    params.probe_threshold = gate;
  }
  if (obj.contains("correct")) {
    ASSIGN_OR_RETURN(params.conf_correct, ParseDistribution(obj["correct"]));
  }
  if (obj.contains("incorrect")) {
    ASSIGN_OR_RETURN(params.conf_incorrect, ParseDistribution(obj["incorrect"]));
  }
  return absl::OkStatus();
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

absl::Status RunSettings::Validate() const {
  if (workers < 1) return absl::InvalidArgumentError("workers must be >= 1");
  if (strategy == Strategy::kZeroShot) return absl::OkStatus();
  RETURN_IF_ERROR(selection.Validate());
  RETURN_IF_ERROR(iteration.Validate());
  if (selection.k != iteration.k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "selection k (", selection.k, ") must equal iteration k (", iteration.k, ")"));
  }
  return absl::OkStatus();
}

absl::Status RunConfig::Validate() const {
  RETURN_IF_ERROR(settings.Validate());
  if (store_path.empty()) return absl::InvalidArgumentError("no store file given");
  if (query_path.empty()) return absl::InvalidArgumentError("no query file given");
  if (traces_out.empty()) return absl::InvalidArgumentError("no trace output path given");
  for (const auto& p : {store_path, query_path}) {
    if (!std::filesystem::exists(p)) {
      return absl::NotFoundError(absl::StrCat("file not found: ", p.string()));
    }
  }
  if (backend == BackendKind::kMock) {
    if (mock_script && !std::filesystem::exists(*mock_script)) {
      return absl::NotFoundError(
          absl::StrCat("file not found: ", mock_script->string()));
    }
    if (!mock_script) RETURN_IF_ERROR(stochastic.Validate());
  } else if (http.endpoint.empty() || http.model.empty()) {
    return absl::InvalidArgumentError("HTTP backend needs an endpoint and a model");
  }
  return absl::OkStatus();
}

absl::Status ApplyRunConfigJson(const json& j, const std::filesystem::path& base_dir,
                                RunConfig& config) {
  RETURN_IF_ERROR(CheckKeys(
      j,
      {"store", "queries", "backend", "mock_script", "stochastic", "http", "embedding",
       "strategy", "alpha", "k", "m", "threshold", "estimator", "policy",
       "exclude_self", "seed", "workers", "out", "report", "task", "template"},
      "config"));
  RunSettings& s = config.settings;
  std::string text;
  if (j.contains("store")) {
    RETURN_IF_ERROR(Read(j, "store", text));
    config.store_path = Resolve(base_dir, text);
  }
  if (j.contains("queries")) {
    RETURN_IF_ERROR(Read(j, "queries", text));
    config.query_path = Resolve(base_dir, text);
  }
  if (j.contains("mock_script")) {
    RETURN_IF_ERROR(Read(j, "mock_script", text));
    config.mock_script = Resolve(base_dir, text);
  }
  if (j.contains("out")) {
    RETURN_IF_ERROR(Read(j, "out", text));
    config.traces_out = Resolve(base_dir, text);
  }
  if (j.contains("report")) {
    RETURN_IF_ERROR(Read(j, "report", text));
    config.report_out = Resolve(base_dir, text);
  }
  if (j.contains("backend")) {
    RETURN_IF_ERROR(Read(j, "backend", text));
    if (text == "mock") {
      config.backend = BackendKind::kMock;
    } else if (text == "http") {
      config.backend = BackendKind::kHttp;
    } else {
      return absl::InvalidArgumentError(absl::StrCat("unknown backend \"", text, "\""));
    }
  }
  if (j.contains("strategy")) {
    RETURN_IF_ERROR(Read(j, "strategy", text));
    ASSIGN_OR_RETURN(s.strategy, ParseStrategy(text));
  }
  if (j.contains("estimator")) {
    RETURN_IF_ERROR(Read(j, "estimator", text));
    ASSIGN_OR_RETURN(s.estimator, ParseEstimatorKind(text));
  }
  if (j.contains("policy")) {
    RETURN_IF_ERROR(Read(j, "policy", text));
    ASSIGN_OR_RETURN(s.iteration.output_policy, ParseOutputPolicy(text));
  }
  if (j.contains("task")) {
    RETURN_IF_ERROR(Read(j, "task", text));
    ASSIGN_OR_RETURN(config.task, ParseTaskKind(text));
  }
  RETURN_IF_ERROR(Read(j, "alpha", s.selection.alpha));
  if (j.contains("k")) {
    RETURN_IF_ERROR(Read(j, "k", s.iteration.k));
    s.selection.k = s.iteration.k;
  }
  RETURN_IF_ERROR(Read(j, "m", s.iteration.m));
  RETURN_IF_ERROR(Read(j, "threshold", s.iteration.c_th));
  RETURN_IF_ERROR(Read(j, "exclude_self", s.exclude_self));
  RETURN_IF_ERROR(Read(j, "seed", s.seed));
  RETURN_IF_ERROR(Read(j, "workers", s.workers));
  if (j.contains("template")) {
    const json& t = j["template"];
    RETURN_IF_ERROR(CheckKeys(t, {"system_prompt", "question_prefix", "confidence_question"},
                              "template"));
    RETURN_IF_ERROR(Read(t, "system_prompt", s.tmpl.system_prompt));
    RETURN_IF_ERROR(Read(t, "question_prefix", s.tmpl.question_prefix));
    RETURN_IF_ERROR(Read(t, "confidence_question", s.tmpl.confidence_question));
  }
  if (j.contains("seed")) config.stochastic.seed = s.seed;
  if (j.contains("stochastic")) RETURN_IF_ERROR(ApplyStochastic(j["stochastic"], config.stochastic));
  if (j.contains("http")) {
    const json& h = j["http"];
    RETURN_IF_ERROR(CheckKeys(h,
                              {"endpoint", "model", "max_tokens", "timeout_ms",
                               "max_attempts", "max_in_flight"},
                              "http"));
    RETURN_IF_ERROR(Read(h, "endpoint", config.http.endpoint));
    RETURN_IF_ERROR(Read(h, "model", config.http.model));
    RETURN_IF_ERROR(Read(h, "max_tokens", config.http.max_tokens));
    RETURN_IF_ERROR(Read(h, "max_attempts", config.http.retry.max_attempts));
    RETURN_IF_ERROR(Read(h, "max_in_flight", config.http.max_in_flight));
    int64_t timeout_ms = config.http.timeout.count();
    RETURN_IF_ERROR(Read(h, "timeout_ms", timeout_ms));
    config.http.timeout = std::chrono::milliseconds(timeout_ms);
  }
  if (j.contains("embedding")) {
    const json& e = j["embedding"];
    RETURN_IF_ERROR(CheckKeys(e, {"endpoint", "text_model", "video_model"}, "embedding"));
    HttpEmbeddingConfig emb;
    RETURN_IF_ERROR(Read(e, "endpoint", emb.endpoint));
    RETURN_IF_ERROR(Read(e, "text_model", emb.text_model));
    RETURN_IF_ERROR(Read(e, "video_model", emb.video_model));
    config.embedding = std::move(emb);
  }
  return absl::OkStatus();
}

absl::Status LoadRunConfigFile(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open config ", path.string()));
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path.string(), ": malformed JSON"));
  }
  return ApplyRunConfigJson(j, path.parent_path(), config);
}

IterationStats ComputeIterationStats(std::span<const InferenceTrace> traces) {
  IterationStats stats;
  for (const InferenceTrace& t : traces) {
    if (!t.status.ok() || t.records.empty()) continue;
    ++stats.traces;
    const IterationRecord* best = &t.records.front();
    for (const IterationRecord& r : t.records) {
      if (r.confidence > best->confidence) best = &r;
    }
    ++stats.argmax_iteration[best->index];
    ++stats.iterations_run[static_cast<int>(t.records.size())];
  }
  return stats;
}

BenchmarkResult RunQueries(std::span<const Query> queries, const ExampleStore& store,
                           Backend& backend, EmbeddingClient* embedder,
                           const RunSettings& settings) {
  BenchmarkResult result;
  result.traces.resize(queries.size());
  const std::unique_ptr<ConfidenceEstimator> estimator =
      MakeEstimator(settings.estimator, settings.tmpl);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      result.traces[i] =
          RunOne(queries[i], store, backend, embedder, *estimator, settings);
    }
  };
  {
    const int workers = std::max(1, settings.workers);
    std::vector<std::jthread> threads;
    for (int w = 1; w < workers; ++w) threads.emplace_back(work);
    work();
  }
  for (const InferenceTrace& t : result.traces) {
    if (!t.status.ok()) {
      spdlog::warn("query \"{}\" failed: {}", t.query_id, std::string(t.status.message()));
      result.failed_query_ids.push_back(t.query_id);
    }
  }
  result.stats = ComputeIterationStats(result.traces);
  return result;
}

absl::StatusOr<BenchmarkResult> RunBenchmark(const RunConfig& config) {
  RETURN_IF_ERROR(config.Validate());
  ASSIGN_OR_RETURN(ExampleStore store, IngestPool(config.store_path));
  ASSIGN_OR_RETURN(std::vector<Query> queries, LoadQueries(config.query_path));

  std::unique_ptr<Backend> backend;
  if (config.backend == BackendKind::kHttp) {
    ASSIGN_OR_RETURN(backend, HttpBackend::Create(config.http));
  } else if (config.mock_script) {
    ASSIGN_OR_RETURN(MockScript script, LoadMockScript(*config.mock_script));
    backend = std::make_unique<ScriptedBackend>(std::move(script));
  } else {
    absl::flat_hash_map<std::string, std::string> golds;
    for (const Query& q : queries) {
      if (q.gold_answer) golds[q.id] = *q.gold_answer;
    }
    ASSIGN_OR_RETURN(backend, StochasticBackend::Create(config.stochastic, std::move(golds)));
  }
  std::unique_ptr<EmbeddingClient> embedder;
  if (config.embedding) {
    ASSIGN_OR_RETURN(embedder, HttpEmbeddingClient::Create(*config.embedding));
  }

  BenchmarkResult result =
      RunQueries(queries, store, *backend, embedder.get(), config.settings);
  RETURN_IF_ERROR(WriteTraces(config.traces_out, result.traces));

  GoldMap golds;
  for (const Query& q : queries) {
    if (q.gold_answer) golds[q.id] = {*q.gold_answer};
  }
  if (!golds.empty()) {
    auto report = Evaluate(result.traces, golds, EvalTask::For(config.task));
    if (report.ok()) {
      result.report = *std::move(report);
    } else {
      spdlog::warn("scoring skipped: {}", std::string(report.status().message()));
    }
  }
  if (config.report_out) {
    ordered_json out = result.report ? ReportToJson(*result.report, config.task)
                                     : ordered_json::object();
    out["iteration_stats"] = IterationStatsToJson(result.stats);
    out["failed_queries"] = result.failed_query_ids;
    std::ofstream f(*config.report_out, std::ios::trunc);
    if (!f) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot write ", config.report_out->string()));
    }
    f << out.dump(2) << '\n';
  }
  return result;
}

ordered_json IterationStatsToJson(const IterationStats& stats) {
  ordered_json argmax = ordered_json::object();
  for (const auto& [index, count] : stats.argmax_iteration) {
    argmax[std::to_string(index)] = count;
  }
  ordered_json run = ordered_json::object();
  for (const auto& [iterations, count] : stats.iterations_run) {
    run[std::to_string(iterations)] = count;
  }
  ordered_json out;
  out["traces"] = stats.traces;
  out["argmax_iteration"] = std::move(argmax);
  out["iterations_run"] = std::move(run);
  return out;
}

ordered_json ReportToJson(const MetricReport& report, TaskKind task) {
  ordered_json out;
  out["task"] = std::string(TaskKindName(task));
  out["sample_count"] = report.sample_count;
  ordered_json metrics = ordered_json::object();
  for (const auto& [name, value] : report.metrics) metrics[name] = value;
  out["metrics"] = std::move(metrics);
  ordered_json items = ordered_json::array();
  for (const ItemScore& item : report.per_item) {
    ordered_json entry;
    entry["query_id"] = item.query_id;
    for (const auto& [name, value] : item.scores) entry[name] = value;
    items.push_back(std::move(entry));
  }
  out["per_item"] = std::move(items);
  return out;
}

}  // namespace itericl
