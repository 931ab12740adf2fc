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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "common/test_util.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "itericl/analysis.h"
#include "itericl/benchmark.h"
#include "itericl/trace_io.h"
#include "json.hpp"

namespace itericl {
namespace {

namespace fs = std::filesystem;
using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::Pair;

const fs::path kData = ITERICL_TEST_DATA_DIR;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class BenchmarkTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("itericl_bench_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig FixtureConfig() {
    RunConfig config;
    EXPECT_TRUE(LoadRunConfigFile(kData / "run_config.json", config).ok());
    config.traces_out = dir_ / "traces.jsonl";
    config.report_out = dir_ / "report.json";
    return config;
  }
  fs::path dir_;
};

TEST_F(BenchmarkTest, ConfigFileResolvesRelativePaths) {
  RunConfig config = FixtureConfig();
  EXPECT_EQ(config.store_path, kData / "pool.jsonl");
  EXPECT_EQ(config.mock_script, kData / "mock_script.json");
  EXPECT_EQ(config.settings.iteration.c_th, 0.7);
  EXPECT_EQ(config.settings.selection.k, 8);
  EXPECT_EQ(config.settings.iteration.k, 8);
  EXPECT_EQ(config.settings.seed, 17u);
  EXPECT_EQ(config.stochastic.seed, 17u);
  EXPECT_EQ(config.settings.workers, 2);
  EXPECT_EQ(config.task, TaskKind::kMultipleChoice);
  EXPECT_TRUE(config.Validate().ok());
}

TEST_F(BenchmarkTest, ConfigRejectsUnknownKeysAndBadValues) {
  RunConfig config;
  auto unknown = ApplyRunConfigJson(nlohmann::json{{"stratgy", "videoicl"}}, "", config);
  EXPECT_THAT(std::string(unknown.message()), HasSubstr("stratgy"));
  EXPECT_FALSE(ApplyRunConfigJson(nlohmann::json{{"k", "eight"}}, "", config).ok());
  EXPECT_FALSE(ApplyRunConfigJson(nlohmann::json{{"strategy", "best"}}, "", config).ok());
  EXPECT_FALSE(ApplyRunConfigJson(nlohmann::json{{"backend", "grpc"}}, "", config).ok());
  EXPECT_FALSE(
      ApplyRunConfigJson(nlohmann::json{{"stochastic", {{"bogus", 1}}}}, "", config).ok());
}

TEST_F(BenchmarkTest, ConfigValidateChecksFiles) {
  RunConfig config = FixtureConfig();
  config.store_path = dir_ / "missing.jsonl";
  EXPECT_EQ(config.Validate().code(), absl::StatusCode::kNotFound);
  config = FixtureConfig();
  config.settings.iteration.k = 4;
  EXPECT_FALSE(config.Validate().ok());
  config = FixtureConfig();
  config.backend = BackendKind::kHttp;
  EXPECT_FALSE(config.Validate().ok());
}

TEST_F(BenchmarkTest, ScriptedRunProducesTracesAndReport) {
  RunConfig config = FixtureConfig();
  auto result = RunBenchmark(config);
  ASSERT_TRUE(result.ok()) << result.status();
  ASSERT_EQ(result->traces.size(), 3u);
  EXPECT_TRUE(result->failed_query_ids.empty());
  EXPECT_EQ(result->traces[0].final_answer, "(B)");
  EXPECT_EQ(result->traces[1].final_answer, "(C)");
  EXPECT_EQ(result->traces[2].records.size(), 1u);
  ASSERT_TRUE(result->report.has_value());
  EXPECT_EQ(result->report->metrics.at("accuracy"), 1.0);
  EXPECT_THAT(result->stats.argmax_iteration, ElementsAre(Pair(1, 1), Pair(2, 1), Pair(3, 1)));
  EXPECT_THAT(result->stats.iterations_run, ElementsAre(Pair(1, 1), Pair(2, 1), Pair(4, 1)));

  auto loaded = LoadTraces(config.traces_out);
  ASSERT_TRUE(loaded.ok());
  EXPECT_EQ(loaded->size(), 3u);
  auto report = nlohmann::json::parse(ReadFile(*config.report_out));
  EXPECT_EQ(report["metrics"]["accuracy"], 1.0);
  EXPECT_EQ(report["iteration_stats"]["argmax_iteration"]["2"], 1);
  EXPECT_TRUE(report["failed_queries"].empty());
}

TEST_F(BenchmarkTest, RepeatedRunsAreByteIdentical) {
  RunConfig config = FixtureConfig();
  ASSERT_TRUE(RunBenchmark(config).ok());
  const std::string first = ReadFile(config.traces_out);
  config.settings.workers = 1;
  ASSERT_TRUE(RunBenchmark(config).ok());
  EXPECT_EQ(ReadFile(config.traces_out), first);
}

TEST_F(BenchmarkTest, ZeroShotRun) {
  RunConfig config = FixtureConfig();
  config.settings.strategy = Strategy::kZeroShot;
  auto result = RunBenchmark(config);
  ASSERT_TRUE(result.ok());
  for (const auto& t : result->traces) {
    ASSERT_EQ(t.records.size(), 1u);
    EXPECT_TRUE(t.records[0].example_ids.empty());
  }
}

TEST_F(BenchmarkTest, PartialFailuresAreRecorded) {
  RunConfig config = FixtureConfig();
  std::ofstream(dir_ / "short.json") << R"j({"q1":[{"answer":"(A)","token_probs":[0.1]}],"q2":[],"q3":[{"answer":"(A)","token_probs":[0.99]}]})j";
  config.mock_script = dir_ / "short.json";
  auto result = RunBenchmark(config);
  ASSERT_TRUE(result.ok());
  EXPECT_THAT(result->failed_query_ids, ElementsAre("q1", "q2"));
  EXPECT_FALSE(result->traces[0].status.ok());
  EXPECT_EQ(result->traces[0].records.size(), 1u);
  EXPECT_TRUE(result->traces[2].status.ok());
  auto loaded = LoadTraces(config.traces_out);
  ASSERT_TRUE(loaded.ok());
  EXPECT_FALSE((*loaded)[1].status.ok());
  EXPECT_EQ(result->stats.traces, 1u);
}

TEST_F(BenchmarkTest, StochasticGapMatchesClosedForm) {
  constexpr int kQueries = 2000;
  std::ofstream pool(dir_ / "pool.jsonl");
  for (int i = 0; i < 8; ++i) {
    pool << R"({"id":"d)" << i << R"(","question":"q","answer":"a","video":"v","text_embedding":[1,)"
         << i << R"(],"video_embedding":[1,)" << i << "]}\n";
  }
  pool.close();
  std::ofstream queries(dir_ / "queries.jsonl");
  for (int i = 0; i < kQueries; ++i) {
    queries << R"({"id":"q)" << i << R"(","question":"q","video":"v","text_embedding":[1,0],)"
            << R"("video_embedding":[1,0],"gold_answer":"gold"})" << "\n";
  }
  queries.close();
  RunConfig config;
  ASSERT_TRUE(ApplyRunConfigJson(
                  nlohmann::json{{"store", "pool.jsonl"},
                                 {"queries", "queries.jsonl"},
                                 {"out", "traces.jsonl"},
                                 {"stochastic", {{"p_c", 0.5}, {"tpr", 0.9}, {"fpr", 0.1}}},
                                 {"k", 8},
                                 {"m", 2},
                                 {"threshold", 0.5},
                                 {"policy", "last"},
                                 {"seed", 2024}},
                  dir_, config)
                  .ok());
  auto icl = RunBenchmark(config);
  ASSERT_TRUE(icl.ok()) << icl.status();
  config.settings.strategy = Strategy::kSimRankOnce;
  auto once = RunBenchmark(config);
  ASSERT_TRUE(once.ok());
  const double a4 = icl->report->metrics.at("accuracy");
  const double a1 = once->report->metrics.at("accuracy");
  const double expected_gap = *ExpectedAccuracy({.p_c = 0.5, .tpr = 0.9, .fpr = 0.1}, 4) - 0.5;
  const double se = std::sqrt(0.85 * 0.15 / kQueries + 0.25 / kQueries);
  EXPECT_NEAR(a4 - a1, expected_gap, 4 * se);
}

TEST(IterationStatsTest, Examples) {
  auto make = [](std::vector<double> confidences) {
    InferenceTrace t{.query_id = "q"};
    int i = 0;
    for (double c : confidences) t.records.push_back({.index = ++i, .confidence = c});
    return t;
  };
  std::vector<InferenceTrace> first = {make({0.9}), make({0.8}), make({0.99})};
  EXPECT_THAT(ComputeIterationStats(first).argmax_iteration, ElementsAre(Pair(1, 3)));
  std::vector<InferenceTrace> second = {make({0.1, 0.9, 0.3}), make({0.1, 0.9})};
  EXPECT_THAT(ComputeIterationStats(second).argmax_iteration, ElementsAre(Pair(2, 2)));
  // Hand tally: argmax at 1, 3, 2, 1 (tie keeps the first), 4.
  std::vector<InferenceTrace> mixed = {make({0.7, 0.2}), make({0.1, 0.2, 0.3}),
                                       make({0.4, 0.6, 0.5, 0.1}), make({0.5, 0.5}),
                                       make({0.1, 0.2, 0.3, 0.4})};
  IterationStats stats = ComputeIterationStats(mixed);
  EXPECT_EQ(stats.traces, 5u);
  EXPECT_THAT(stats.argmax_iteration, ElementsAre(Pair(1, 2), Pair(2, 1), Pair(3, 1), Pair(4, 1)));
  EXPECT_THAT(stats.iterations_run, ElementsAre(Pair(2, 2), Pair(3, 1), Pair(4, 2)));
  auto json = IterationStatsToJson(stats);
  EXPECT_EQ(json["argmax_iteration"]["1"], 2);
}

}  // namespace
}  // namespace itericl
