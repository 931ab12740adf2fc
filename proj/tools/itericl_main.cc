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

// Command-line front end: ingest, select, run, simulate, eval, stats.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "itericl/analysis.h"
#include "itericl/benchmark.h"
#include "itericl/example_store.h"
#include "itericl/metrics.h"
#include "itericl/trace_io.h"
#include "json.hpp"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"

namespace {

using itericl::BenchmarkResult;
using itericl::RunConfig;
using ordered_json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kPartial = 2, kFatal = 3 };

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status.message() << '\n';
  return status.code() == absl::StatusCode::kInvalidArgument ? kUsage : kFatal;
}

// Writes to `path`, or stdout when empty.
int Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << path << '\n';
    return kFatal;
  }
  out << text;
  return kOk;
}

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string log_level = "warn";
};

struct RunFlags {
  std::string store, queries, backend, strategy, estimator, policy, out, report;
  std::string mock_script, endpoint, model, task;
  std::string embed_endpoint, embed_text_model, embed_video_model;
  double alpha = 0.5, threshold = 0.5;
  int k = 8, m = 2;
  double stochastic_pc = 0.5, stochastic_tpr = 0.9, stochastic_fpr = 0.1;
  bool exclude_self = false;
};

int DoIngest(const std::string& store_path) {
  auto store = itericl::IngestPool(store_path);
  if (!store.ok()) return Fail(store.status());
  const itericl::StoreStats stats = itericl::ComputeStoreStats(*store);
  ordered_json out;
  out["count"] = stats.count;
  out["text_dim"] = stats.text_dim;
  out["video_dim"] = stats.video_dim;
  out["zero_norm_text"] = stats.zero_norm_text;
  out["zero_norm_video"] = stats.zero_norm_video;
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int DoSelect(const std::string& store_path, const std::string& query_path, double alpha,
             int k, bool exclude_self, const std::string& out_path) {
  auto store = itericl::IngestPool(store_path);
  if (!store.ok()) return Fail(store.status());
  auto queries = itericl::LoadQueries(query_path);
  if (!queries.ok()) return Fail(queries.status());
  std::string text;
  int exit = kOk;
  for (const itericl::Query& q : *queries) {
    itericl::SelectionConfig sel{.alpha = alpha, .k = k};
    if (exclude_self) sel.exclude_ids.insert(q.id);
    ordered_json line;
    line["query_id"] = q.id;
    auto ranked = itericl::SelectRelevantK(*store, q, sel);
    if (!ranked.ok()) {
      line["error"] = std::string(ranked.status().message());
      exit = kPartial;
    } else {
      ordered_json ranking = ordered_json::array();
      for (const auto& r : *ranked) {
        ranking.push_back({{"rank", r.rank}, {"id", r.demonstration_id}, {"score", r.score}});
      }
      line["ranking"] = std::move(ranking);
    }
    text += line.dump() + "\n";
  }
  const int written = Emit(out_path, text);
  return written != kOk ? written : exit;
}

int DoRun(const GlobalOptions& global, const RunFlags& f, const CLI::App& cmd) {
  RunConfig config;
  if (!global.config.empty()) {
    absl::Status status = itericl::LoadRunConfigFile(global.config, config);
    if (!status.ok()) return Fail(status);
  }
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  itericl::RunSettings& s = config.settings;
  if (given("--store")) config.store_path = f.store;
  if (given("--queries")) config.query_path = f.queries;
  if (given("--out")) config.traces_out = f.out;
  if (given("--report")) config.report_out = f.report;
  if (given("--mock-script")) config.mock_script = f.mock_script;
  if (given("--backend")) {
    config.backend = f.backend == "http" ? itericl::BackendKind::kHttp
                                         : itericl::BackendKind::kMock;
  }
  if (given("--strategy")) s.strategy = *itericl::ParseStrategy(f.strategy);
  if (given("--estimator")) s.estimator = *itericl::ParseEstimatorKind(f.estimator);
  if (given("--policy")) s.iteration.output_policy = *itericl::ParseOutputPolicy(f.policy);
  if (given("--task")) config.task = *itericl::ParseTaskKind(f.task);
  if (given("--alpha")) s.selection.alpha = f.alpha;
  if (given("--k")) s.iteration.k = s.selection.k = f.k;
  if (given("--m")) s.iteration.m = f.m;
  if (given("--threshold")) s.iteration.c_th = f.threshold;
  if (given("--exclude-self")) s.exclude_self = true;
  if (given("--endpoint")) config.http.endpoint = f.endpoint;
  if (given("--model")) config.http.model = f.model;
  if (given("--embed-endpoint")) {
    config.embedding = itericl::HttpEmbeddingConfig{.endpoint = f.embed_endpoint,
                                                    .text_model = f.embed_text_model,
                                                    .video_model = f.embed_video_model};
  }
  if (given("--stochastic-pc") || given("--stochastic-tpr") || given("--stochastic-fpr")) {
    config.stochastic.p_c = f.stochastic_pc;
    config.stochastic.conf_correct =
        itericl::ConfidenceDistribution::SplitUniform(s.iteration.c_th, f.stochastic_tpr);
    config.stochastic.conf_incorrect =
        itericl::ConfidenceDistribution::SplitUniform(s.iteration.c_th, f.stochastic_fpr);
    config.stochastic.probe_threshold = s.iteration.c_th;
  }
  if (global.seed) {
    s.seed = *global.seed;
    config.stochastic.seed = *global.seed;
  }
  if (global.workers) s.workers = *global.workers;

  absl::StatusOr<BenchmarkResult> result = itericl::RunBenchmark(config);
  if (!result.ok()) return Fail(result.status());
  ordered_json summary;
  summary["traces"] = result->traces.size();
  summary["failed"] = result->failed_query_ids.size();
  if (result->report) {
    ordered_json metrics = ordered_json::object();
    for (const auto& [name, value] : result->report->metrics) metrics[name] = value;
    summary["metrics"] = std::move(metrics);
  }
  summary["iteration_stats"] = itericl::IterationStatsToJson(result->stats);
  std::cout << summary.dump(2) << '\n';
  return result->failed_query_ids.empty() ? kOk : kPartial;
}

int DoSimulate(const GlobalOptions& global, double pc, double tpr, double fpr, int max_iters,
               int64_t trials, const std::string& policy_name, const std::string& out_path) {
  auto policy = itericl::ParseOutputPolicy(policy_name);
  if (!policy.ok()) return Fail(policy.status());
  const itericl::AnalysisParams params{.p_c = pc, .tpr = tpr, .fpr = fpr};
  itericl::MonteCarloConfig mc{.trials = trials,
                               .seed = global.seed.value_or(0),
                               .policy = *policy,
                               .workers = global.workers.value_or(1)};
  auto rows = itericl::Sweep(std::span(&params, 1), 1, max_iters, mc);
  if (!rows.ok()) return Fail(rows.status());
  std::ostringstream csv;
  itericl::WriteSweepCsv(csv, *rows, /*with_params=*/false);
  return Emit(out_path, csv.str());
}

int DoEval(const std::string& task_name, const std::string& traces_path,
           const std::string& gold_path, const std::string& report_path) {
  auto task = itericl::ParseTaskKind(task_name);
  if (!task.ok()) return Fail(task.status());
  auto traces = itericl::LoadTraces(traces_path);
  if (!traces.ok()) return Fail(traces.status());
  auto golds = itericl::LoadGolds(gold_path);
  if (!golds.ok()) return Fail(golds.status());
  auto report = itericl::Evaluate(*traces, *golds, itericl::EvalTask::For(*task));
  if (!report.ok()) return Fail(report.status());
  ordered_json out = itericl::ReportToJson(*report, *task);
  out["iteration_stats"] =
      itericl::IterationStatsToJson(itericl::ComputeIterationStats(*traces));
  return Emit(report_path, out.dump(2) + "\n");
}

int DoStats(const std::string& traces_path, const std::string& out_path) {
  auto traces = itericl::LoadTraces(traces_path);
  if (!traces.ok()) return Fail(traces.status());
  const ordered_json out =
      itericl::IterationStatsToJson(itericl::ComputeIterationStats(*traces));
  return Emit(out_path, out.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Similarity-ranked, confidence-gated in-context inference toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--config", global.config, "JSON run configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "Random seed");
  app.add_option("--workers", global.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", global.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  // ingest
  std::string ingest_store;
  CLI::App* ingest = app.add_subcommand("ingest", "Validate a pool file and print its stats");
  ingest->add_option("--store", ingest_store, "Pool JSONL file")->required();

  // select
  std::string sel_store, sel_queries, sel_out;
  double sel_alpha = 0.5;
  int sel_k = 8;
  bool sel_exclude_self = false;
  CLI::App* select = app.add_subcommand("select", "Dump the top-k ranking for each query");
  select->add_option("--store", sel_store, "Pool JSONL file")->required();
  select->add_option("--queries", sel_queries, "Query JSONL file")->required();
  select->add_option("--alpha", sel_alpha, "Text similarity weight")
      ->check(CLI::Range(0.0, 1.0));
  select->add_option("--k", sel_k, "Examples to retrieve")->check(CLI::PositiveNumber);
  select->add_flag("--exclude-self", sel_exclude_self, "Exclude a query's own id");
  select->add_option("--out", sel_out, "Output JSONL (default stdout)");

  // run
  RunFlags rf;
  CLI::App* run = app.add_subcommand("run", "Run a strategy over a query file");
  run->add_option("--store", rf.store, "Pool JSONL file");
  run->add_option("--queries", rf.queries, "Query JSONL file");
  run->add_option("--backend", rf.backend, "Model backend")
      ->check(CLI::IsMember({"mock", "http"}));
  run->add_option("--strategy", rf.strategy, "Inference strategy")
      ->check(CLI::IsMember({"zeroshot", "videoicl", "simrankonce", "randexvote", "simrankvote"}));
  run->add_option("--alpha", rf.alpha, "Text similarity weight")->check(CLI::Range(0.0, 1.0));
  run->add_option("--k", rf.k, "Total examples")->check(CLI::PositiveNumber);
  run->add_option("--m", rf.m, "Examples per iteration")->check(CLI::PositiveNumber);
  run->add_option("--threshold", rf.threshold, "Confidence threshold")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--estimator", rf.estimator, "Confidence estimator")
      ->check(CLI::IsMember({"min_token_prob", "verbalization"}));
  run->add_option("--policy", rf.policy, "Final answer policy")
      ->check(CLI::IsMember({"argmax", "last"}));
  run->add_option("--out", rf.out, "Trace JSONL output");
  run->add_option("--report", rf.report, "Metric report JSON output");
  run->add_option("--task", rf.task, "Task kind used for scoring")
      ->check(CLI::IsMember({"multiple_choice", "open_ended", "classification", "captioning"}));
  run->add_flag("--exclude-self", rf.exclude_self, "Exclude a query's own id from its pool");
  run->add_option("--mock-script", rf.mock_script, "Scripted mock responses (JSON)");
  run->add_option("--stochastic-pc", rf.stochastic_pc, "Stochastic mock: P(correct)");
  run->add_option("--stochastic-tpr", rf.stochastic_tpr, "Stochastic mock: gate TPR");
  run->add_option("--stochastic-fpr", rf.stochastic_fpr, "Stochastic mock: gate FPR");
  run->add_option("--endpoint", rf.endpoint, "HTTP backend base URL");
  run->add_option("--model", rf.model, "HTTP backend model name");
  run->add_option("--embed-endpoint", rf.embed_endpoint, "Embedding service base URL");
  run->add_option("--embed-text-model", rf.embed_text_model, "Text embedding model");
  run->add_option("--embed-video-model", rf.embed_video_model, "Video embedding model");

  // simulate
  double sim_pc = 0.5, sim_tpr = 0.9, sim_fpr = 0.1;
  int sim_iters = 20;
  int64_t sim_trials = 100000;
  std::string sim_policy = "last", sim_out;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Closed-form vs Monte Carlo accuracy of gated iteration");
  simulate->add_option("--pc", sim_pc, "P(correct answer)")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--tpr", sim_tpr, "Gate true positive rate")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--fpr", sim_fpr, "Gate false positive rate")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--max-iters", sim_iters, "Largest n")->check(CLI::PositiveNumber);
  simulate->add_option("--trials", sim_trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  simulate->add_option("--policy", sim_policy, "Final answer policy")
      ->check(CLI::IsMember({"last", "argmax"}));
  simulate->add_option("--out", sim_out, "CSV output (default stdout)");

  // eval
  std::string eval_task, eval_traces, eval_gold, eval_report;
  CLI::App* eval = app.add_subcommand("eval", "Score traces against gold answers");
  eval->add_option("--task", eval_task, "Task kind")
      ->required()
      ->check(CLI::IsMember({"multiple_choice", "open_ended", "classification", "captioning"}));
  eval->add_option("--traces", eval_traces, "Trace JSONL file")->required();
  eval->add_option("--gold", eval_gold, "JSONL with id and gold_answer")->required();
  eval->add_option("--report", eval_report, "Report JSON output (default stdout)");

  // stats
  std::string stats_traces, stats_out;
  CLI::App* stats = app.add_subcommand("stats", "Histogram of most-confident iterations");
  stats->add_option("--traces", stats_traces, "Trace JSONL file")->required();
  stats->add_option("--out", stats_out, "JSON output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  spdlog::set_level(spdlog::level::from_str(global.log_level));
  spdlog::set_default_logger(spdlog::stderr_color_st("itericl"));
  spdlog::set_level(spdlog::level::from_str(global.log_level));

  try {
    if (*ingest) return DoIngest(ingest_store);
    if (*select) {
      return DoSelect(sel_store, sel_queries, sel_alpha, sel_k, sel_exclude_self, sel_out);
    }
    if (*run) return DoRun(global, rf, *run);
    if (*simulate) {
      return DoSimulate(global, sim_pc, sim_tpr, sim_fpr, sim_iters, sim_trials, sim_policy,
                        sim_out);
    }
    if (*eval) return DoEval(eval_task, eval_traces, eval_gold, eval_report);
    if (*stats) return DoStats(stats_traces, stats_out);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return kFatal;
  }
  return kUsage;
}
