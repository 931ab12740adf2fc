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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common/oracles.h"
#include "itericl/analysis.h"
#include "itericl/benchmark.h"
#include "itericl/confidence.h"
#include "itericl/example_store.h"
#include "itericl/inference_engine.h"
#include "itericl/metrics.h"
#include "itericl/mock_backends.h"
#include "itericl/trace_io.h"
#include "json.hpp"

namespace itericl {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path ScratchDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("itericl_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const AnalysisParams kReference{.p_c = 0.5, .tpr = 0.9, .fpr = 0.1};

Outcome AsymptoteReproduction() {
  auto asym = AsymptoticAccuracy(kReference);
  auto a50 = ExpectedAccuracy(kReference, 50);
  auto mc = MonteCarloAccuracy(kReference, 50,
                               {.trials = 1000000, .seed = 20240601,
                                .policy = OutputPolicy::kLastAnswer});
  if (!asym.ok() || !a50.ok() || !mc.ok()) return {false, "computation failed"};
  const bool pass = asym->value == 0.9 && std::abs(*a50 - 0.9) <= 1e-12 &&
                    std::abs(mc->estimate - 0.9) <= 0.003;
  return {pass, Fmt("asymptote=%.15g a(50)-0.9=%.3g mc(1e6)=%.5f", asym->value, *a50 - 0.9,
                    mc->estimate)};
}

Outcome SimulatorAgreement() {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> horizon(1, 20);
  int agree = 0;
  double worst = 0.0;
  for (int cell = 0; cell < 100; ++cell) {
    const AnalysisParams p{u(rng), u(rng), u(rng)};
    const int n = horizon(rng);
    const double a = *ExpectedAccuracy(p, n);
    auto mc = MonteCarloAccuracy(p, n, {.trials = 100000, .seed = 1000 + std::uint64_t(cell)});
    if (!mc.ok()) return {false, "monte carlo failed"};
    const double se = std::sqrt(a * (1 - a) / 100000.0);
    const double z = se > 0 ? std::abs(mc->estimate - a) / se
                            : (mc->estimate == a ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    agree += z <= 4.0;
  }
  return {agree >= 99, Fmt("%d/100 cells within 4 SE (max |z|=%.2f)", agree, worst)};
}

Outcome MonotonicityLaw() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int point = 0; point < 1000; ++point) {
    const AnalysisParams p{u(rng), u(rng), u(rng)};
    for (int n = 1; n <= 20; ++n) {
      const double diff = *ExpectedAccuracy(p, n + 1) - *ExpectedAccuracy(p, n);
      if (p.tpr >= p.fpr ? diff < -1e-12 : diff > 1e-12) ++violations;
    }
  }
  return {violations == 0, Fmt("%d violations over 1000 points x 20 horizons", violations)};
}

Outcome RetrievalOracle() {
  std::mt19937_64 rng(9001);
  std::uniform_int_distribution<std::size_t> size(1, 10000);
  std::uniform_int_distribution<int> kdist(1, 64);
  std::uniform_real_distribution<double> alpha(0.0, 1.0);
  int mismatches = 0;
  std::size_t largest = 0;
  for (int pool = 0; pool < 200; ++pool) {
    const std::size_t n = size(rng);
    largest = std::max(largest, n);
    auto store = ExampleStore::Create(testing::RandomDemos(rng, n, 64));
    if (!store.ok()) return {false, store.status().ToString()};
    const Query q = testing::RandomQuery(rng, 64);
    const SelectionConfig cfg{.alpha = alpha(rng), .k = kdist(rng)};
    auto got = SelectRelevantK(*store, q, cfg);
    if (!got.ok() || !testing::MatchesOracle(*got, testing::OracleTopK(*store, q, cfg))) {
      ++mismatches;
    }
  }
  return {mismatches == 0,
          Fmt("%d/200 pools differ from exhaustive sort (largest pool %zu)", mismatches, largest)};
}

ExampleStore LinearPool(int n) {
  std::vector<Demonstration> demos;
  for (int i = 1; i <= n; ++i) {
    const double x = 1.0 - 0.05 * i;
    const std::string id = "d" + std::to_string(i);
    demos.push_back({.id = id,
                     .question = "q-" + id,
                     .answer = "a-" + id,
                     .video_ref = "v-" + id + ".mp4",
                     .text_embedding = *EmbeddingVector::Create({x, 1.0 - x}),
                     .video_embedding = *EmbeddingVector::Create({x, 1.0 - x})});
  }
  return *ExampleStore::Create(std::move(demos));
}

Query AxisQuery() {
  Query q;
  q.id = "q1";
  q.question = "question q1";
  q.video_ref = "q1.mp4";
  q.text_embedding = *EmbeddingVector::Create({1.0, 0.0});
  q.video_embedding = *EmbeddingVector::Create({1.0, 0.0});
  return q;
}

MockScript Script(const std::vector<std::pair<std::string, double>>& entries) {
  MockScript script;
  for (const auto& [answer, c] : entries) {
    GenerationOutput out;
    out.answer = answer;
    out.token_probs = {1.0, c};
    script["q1"].push_back(out);
  }
  return script;
}

InferenceTrace RunScripted(Strategy strategy,
                           const std::vector<std::pair<std::string, double>>& entries,
                           IterationConfig it) {
  const ExampleStore store = LinearPool(8);
  ScriptedBackend backend(Script(entries));
  auto estimator = MakeEstimator(EstimatorKind::kMinTokenProb);
  EngineContext ctx{store, backend, *estimator, {}};
  auto trace = RunStrategy(strategy, AxisQuery(), ctx, {.k = it.k}, it, 0);
  return trace.ok() ? *trace : InferenceTrace{.status = trace.status()};
}

bool MatchesGolden(const std::string& name, const std::vector<InferenceTrace>& traces) {
  std::string actual;
  for (const auto& t : traces) actual += SerializeTrace(t) + "\n";
  return actual == ReadFile(fs::path(ITERICL_GOLDEN_DIR) / (name + ".jsonl"));
}

Outcome ScriptedSemantics() {
  std::vector<std::string> failed;
  const auto early = RunScripted(Strategy::kVideoIcl, {{"(A)", 0.4}, {"(B)", 0.8}, {"(C)", 0.9}},
                                 {.k = 8, .m = 2, .c_th = 0.7});
  if (early.records.size() != 2 || !early.records[1].terminated_early ||
      early.final_answer != "(B)" || !MatchesGolden("early_stop", {early})) {
    failed.push_back("early_stop");
  }
  const auto exhausted =
      RunScripted(Strategy::kVideoIcl, {{"(A)", 0.4}, {"(B)", 0.3}, {"(C)", 0.6}, {"(D)", 0.2}},
                  {.k = 8, .m = 2, .c_th = 0.7});
  if (exhausted.records.size() != 4 || exhausted.final_answer != "(C)" ||
      !MatchesGolden("exhaustion_argmax", {exhausted})) {
    failed.push_back("exhaustion_argmax");
  }
  const auto never =
      RunScripted(Strategy::kVideoIcl, {{"(A)", 1.0}, {"(B)", 1.0}, {"(C)", 1.0}, {"(D)", 1.0}},
                  {.k = 8, .m = 2, .c_th = 1.0});
  if (never.records.size() != 4 || !MatchesGolden("threshold_one", {never})) {
    failed.push_back("threshold_one");
  }
  const auto icl = RunScripted(Strategy::kVideoIcl, {{"(A)", 0.3}}, {.k = 2, .m = 2, .c_th = 0.5});
  const auto once =
      RunScripted(Strategy::kSimRankOnce, {{"(A)", 0.3}}, {.k = 2, .m = 2, .c_th = 0.5});
  InferenceTrace relabelled = once;
  relabelled.strategy = icl.strategy;
  if (SerializeTrace(icl) != SerializeTrace(relabelled) ||
      !MatchesGolden("k_equals_m", {icl, once})) {
    failed.push_back("k_equals_m");
  }
  std::string detail = "early stop, argmax on exhaustion, c_th=1, k=m";
  if (!failed.empty()) {
    detail = "mismatch:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

Outcome TheoryBridge() {
  constexpr int kQueries = 5000;
  const fs::path dir = ScratchDir("bridge");
  {
    std::ofstream pool(dir / "pool.jsonl");
    for (int i = 0; i < 8; ++i) {
      pool << nlohmann::json{{"id", "d" + std::to_string(i)}, {"question", "q"},
                             {"answer", "a"}, {"video", "v"},
                             {"text_embedding", {1, i}}, {"video_embedding", {1, i}}}
                  .dump()
           << "\n";
    }
    std::ofstream queries(dir / "queries.jsonl");
    for (int i = 0; i < kQueries; ++i) {
      queries << nlohmann::json{{"id", "q" + std::to_string(i)}, {"question", "q"},
                                {"video", "v"}, {"text_embedding", {1, 0}},
                                {"video_embedding", {1, 0}}, {"gold_answer", "gold"}}
                     .dump()
              << "\n";
    }
  }
  RunConfig config;
  const absl::Status applied = ApplyRunConfigJson(
      nlohmann::json{{"store", "pool.jsonl"},
                     {"queries", "queries.jsonl"},
                     {"out", "traces.jsonl"},
                     {"stochastic", {{"p_c", 0.5}, {"tpr", 0.9}, {"fpr", 0.1}}},
                     {"k", 8},
                     {"m", 2},
                     {"threshold", 0.5},
                     {"policy", "last"},
                     {"seed", 31337}},
      dir, config);
  if (!applied.ok()) return {false, applied.ToString()};
  auto icl = RunBenchmark(config);
  config.settings.strategy = Strategy::kSimRankOnce;
  config.traces_out = dir / "once.jsonl";
  auto once = RunBenchmark(config);
  fs::remove_all(dir);
  if (!icl.ok() || !once.ok() || !icl->report || !once->report) {
    return {false, "benchmark run failed"};
  }
  const double a4 = icl->report->metrics.at("accuracy");
  const double a1 = once->report->metrics.at("accuracy");
  const double expected = *ExpectedAccuracy(kReference, 4);
  const double se = std::sqrt(expected * (1 - expected) / kQueries);
  const bool pass = std::abs(a4 - expected) <= 4 * se && a4 > a1;
  return {pass, Fmt("iterative=%.4f expected=%.4f (4 SE=%.4f) single-shot=%.4f", a4, expected,
                    4 * se, a1)};
}

Outcome MetricOracles() {
  std::vector<std::string> failed;
  {
    std::vector<std::string> c = {"the the the"};
    std::vector<std::vector<std::string>> r = {{"the cat"}};
    if (std::abs(Bleu(c, r)->corpus[0] - 1.0 / 3.0) > 1e-6) failed.push_back("clipped");
  }
  {
    std::vector<std::string> c = {"a b c d"};
    std::vector<std::vector<std::string>> r = {{"a c b d"}};
    if (std::abs(RougeL(c, r)->corpus - 0.75) > 1e-6) failed.push_back("lcs");
  }
  std::ifstream in(fs::path(ITERICL_TEST_DATA_DIR) / "metric_fixture.json");
  const nlohmann::json fixture = nlohmann::json::parse(in);
  std::vector<std::string> cands;
  std::vector<std::vector<std::string>> refs;
  for (const auto& pair : fixture["pairs"]) {
    cands.push_back(pair["candidate"]);
    refs.push_back(pair["references"].get<std::vector<std::string>>());
  }
  auto bleu = Bleu(cands, refs);
  auto rouge = RougeL(cands, refs);
  bool fixture_ok = bleu.ok() && rouge.ok() &&
                    std::abs(rouge->corpus - fixture["corpus_rouge_l"].get<double>()) <= 1e-6;
  for (int n = 0; fixture_ok && n < 4; ++n) {
    fixture_ok = std::abs(bleu->corpus[n] - fixture["corpus_bleu"][n].get<double>()) <= 1e-6;
    for (std::size_t i = 0; fixture_ok && i < cands.size(); ++i) {
      fixture_ok =
          std::abs(bleu->per_sentence[i][n] - fixture["sentence_bleu"][i][n].get<double>()) <= 1e-6 &&
          std::abs(rouge->per_pair[i] - fixture["rouge_l"][i].get<double>()) <= 1e-6;
    }
  }
  if (!fixture_ok) failed.push_back("fixture");
  std::vector<std::string> self;
  for (const auto& r : refs) self.push_back(r.front());
  auto self_bleu = Bleu(self, refs);
  auto self_rouge = RougeL(self, refs);
  bool self_ok = self_rouge->corpus == 1.0;
  for (double b : self_bleu->corpus) self_ok = self_ok && std::abs(b - 1.0) <= 1e-12;
  if (!self_ok) failed.push_back("self-match");
  std::string detail = Fmt("clipped BLEU-1, LCS F, %zu-pair fixture, self-match", cands.size());
  if (!failed.empty()) {
    detail = "mismatch:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(ITERICL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome Determinism() {
  const fs::path dir = ScratchDir("determinism");
  const std::string data = ITERICL_TEST_DATA_DIR;
  const std::string run = "--config " + data + "/run_config.json --seed 11 run --out ";
  const std::string sim =
      "simulate --pc 0.5 --tpr 0.9 --fpr 0.1 --max-iters 10 --trials 200000 --out ";
  const int codes[] = {
      RunCli(run + (dir / "a.jsonl").string()),
      RunCli(run + (dir / "b.jsonl").string() + " --workers 3"),
      RunCli("--seed 5 --workers 1 " + sim + (dir / "w1.csv").string()),
      RunCli("--seed 5 --workers 4 " + sim + (dir / "w4.csv").string()),
  };
  for (int code : codes) {
    if (code != 0) {
      fs::remove_all(dir);
      return {false, Fmt("cli exited with %d", code)};
    }
  }
  const std::string a = ReadFile(dir / "a.jsonl");
  const bool traces_same = !a.empty() && a == ReadFile(dir / "b.jsonl");
  const std::string w1 = ReadFile(dir / "w1.csv");
  const bool sim_same = !w1.empty() && w1 == ReadFile(dir / "w4.csv");
  fs::remove_all(dir);
  return {traces_same && sim_same,
          Fmt("run traces %s (%zu bytes); simulate csv %s across 1 and 4 workers",
              traces_same ? "identical" : "differ", a.size(), sim_same ? "identical" : "differ")};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;  // 0 for none
  std::function<Outcome()> check;
};

}  // namespace
}  // namespace itericl

int main() {
  using namespace itericl;
  const std::vector<Criterion> criteria = {
      {"AC1", "asymptotic accuracy reproduction", 10, AsymptoteReproduction},
      {"AC2", "closed form agrees with simulation", 60, SimulatorAgreement},
      {"AC3", "monotonicity law", 0, MonotonicityLaw},
      {"AC4", "retrieval matches exhaustive oracle", 30, RetrievalOracle},
      {"AC5", "scripted loop semantics and golden traces", 0, ScriptedSemantics},
      {"AC6", "stochastic mock matches closed form", 120, TheoryBridge},
      {"AC7", "metric oracles", 0, MetricOracles},
      {"AC8", "determinism", 0, Determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome = c.check();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && seconds > c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += Fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failures += !outcome.pass;
    std::printf("%s %s  %s: %s [%.2f s]\n", c.id, outcome.pass ? "PASS" : "FAIL", c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
