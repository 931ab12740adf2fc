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

#include "itericl/inference_engine.h"

#include <algorithm>
#include <iterator>
#include <random>

#include "absl/container/flat_hash_map.h"
#include "absl/strings/str_cat.h"
#include "itericl/answer_normalization.h"
#include "itericl/seeding.h"
#include "itericl/status_macros.h"

namespace itericl {
namespace {

using Batch = std::vector<const Demonstration*>;

std::vector<Batch> RankedBatches(const ExampleStore& store,
                                 std::span<const RankedExample> ranked, int m) {
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < ranked.size(); start += m) {
    Batch batch;
    const std::size_t end = std::min(ranked.size(), start + m);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(&store.at(ranked[i].ingest_index));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

// Runs one generation for `batch` and scores it.
absl::StatusOr<IterationRecord> RunIteration(const Query& query,
                                             const EngineContext& ctx,
                                             const Batch& batch, int index) {
  GenerationRequest request{.query_id = query.id,
                            .segments = AssemblePrompt(batch, query, ctx.tmpl)};
  ASSIGN_OR_RETURN(GenerationOutput output, Generate(ctx.backend, request));
  ASSIGN_OR_RETURN(double confidence,
                   ctx.estimator.Estimate(ctx.backend, request, output));
  IterationRecord record{.index = index,
                         .answer = std::move(output.answer),
                         .token_probs = std::move(output.token_probs),
                         .confidence = confidence};
  record.example_ids.reserve(batch.size());
  for (const Demonstration* demo : batch) record.example_ids.push_back(demo->id);
  return record;
}

// Runs batches in order. With `c_th` set, stops after the first record whose
// confidence exceeds it. A backend failure is stored in trace.status.
void RunBatches(const Query& query, const EngineContext& ctx,
                std::span<const Batch> batches, std::optional<double> c_th,
                InferenceTrace& trace) {
  for (std::size_t i = 0; i < batches.size(); ++i) {
    absl::StatusOr<IterationRecord> record =
        RunIteration(query, ctx, batches[i], static_cast<int>(i + 1));
    if (!record.ok()) {
      trace.status = absl::Status(
          record.status().code(),
          absl::StrCat("iteration ", i + 1, ": ", record.status().message()));
      return;
    }
    const bool confident = c_th && record->confidence > *c_th;
    const bool last = i + 1 == batches.size();
    record->terminated_early = confident && !last;
    trace.records.push_back(*std::move(record));
    if (confident) return;
  }
}

void FinishByPolicy(OutputPolicy policy, InferenceTrace& trace) {
  if (trace.records.empty()) return;
  const IterationRecord* chosen = &trace.records.back();
  if (policy == OutputPolicy::kArgmaxConfidence) {
    chosen = &trace.records.front();
    for (const IterationRecord& r : trace.records) {
      if (r.confidence > chosen->confidence) chosen = &r;
    }
  }
  trace.final_answer = chosen->answer;
  trace.final_confidence = chosen->confidence;
}

void FinishByVote(InferenceTrace& trace) {
  if (trace.records.empty()) return;
  std::vector<VoteCandidate> candidates;
  candidates.reserve(trace.records.size());
  for (const IterationRecord& r : trace.records) {
    candidates.push_back({r.answer, r.confidence});
  }
  absl::StatusOr<VoteResult> vote = MajorityVote(candidates);
  trace.final_answer = vote->answer;
  trace.final_confidence = vote->confidence;
}

InferenceTrace NewTrace(const Query& query, Strategy strategy) {
  return InferenceTrace{.query_id = query.id,
                        .strategy = std::string(StrategyName(strategy))};
}

}  // namespace

std::string_view OutputPolicyName(OutputPolicy policy) {
  switch (policy) {
    case OutputPolicy::kArgmaxConfidence:
      return "argmax_confidence";
    case OutputPolicy::kLastAnswer:
      return "last_answer";
  }
  return "unknown";
}

absl::StatusOr<OutputPolicy> ParseOutputPolicy(std::string_view name) {
  if (name == "argmax" || name == "argmax_confidence") {
    return OutputPolicy::kArgmaxConfidence;
  }
  if (name == "last" || name == "last_answer") return OutputPolicy::kLastAnswer;
  return absl::InvalidArgumentError(absl::StrCat("unknown output policy \"", std::string(name), "\""));
}

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kZeroShot:
      return "zeroshot";
    case Strategy::kVideoIcl:
      return "videoicl";
    case Strategy::kSimRankOnce:
      return "simrankonce";
    case Strategy::kRandExVote:
      return "randexvote";
    case Strategy::kSimRankVote:
      return "simrankvote";
  }
  return "unknown";
}

absl::StatusOr<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kZeroShot, Strategy::kVideoIcl, Strategy::kSimRankOnce,
                     Strategy::kRandExVote, Strategy::kSimRankVote}) {
    if (StrategyName(s) == name) return s;
  }
  if (name == "zero_shot") return Strategy::kZeroShot;
  return absl::InvalidArgumentError(absl::StrCat("unknown strategy \"", std::string(name), "\""));
}

absl::Status IterationConfig::Validate() const {
  if (m < 1) return absl::InvalidArgumentError(absl::StrCat("m must be >= 1, got ", m));
  if (k < m) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be >= m, got k=", k, " m=", m));
  }
  if (!(c_th >= 0.0 && c_th <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("confidence threshold must lie in [0, 1], got ", c_th));
  }
  return absl::OkStatus();
}

absl::StatusOr<InferenceTrace> RunVideoIcl(const Query& query,
                                           const EngineContext& ctx,
                                           const SelectionConfig& sel,
                                           const IterationConfig& it) {
  RETURN_IF_ERROR(it.Validate());
  if (sel.k != it.k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "selection k (", sel.k, ") must equal iteration k (", it.k, ")"));
  }
  ASSIGN_OR_RETURN(std::vector<RankedExample> ranked,
                   SelectRelevantK(ctx.store, query, sel));
  const std::vector<Batch> batches = RankedBatches(ctx.store, ranked, it.m);
  InferenceTrace trace = NewTrace(query, Strategy::kVideoIcl);
  RunBatches(query, ctx, batches, it.c_th, trace);
  FinishByPolicy(it.output_policy, trace);
  return trace;
}

absl::StatusOr<InferenceTrace> RunSimRankOnce(const Query& query,
                                              const EngineContext& ctx,
                                              const SelectionConfig& sel, int m) {
  if (m < 1) return absl::InvalidArgumentError(absl::StrCat("m must be >= 1, got ", m));
  SelectionConfig top_m = sel;
  top_m.k = m;
  ASSIGN_OR_RETURN(std::vector<RankedExample> ranked,
                   SelectRelevantK(ctx.store, query, top_m));
  const std::vector<Batch> batches = RankedBatches(ctx.store, ranked, m);
  InferenceTrace trace = NewTrace(query, Strategy::kSimRankOnce);
  RunBatches(query, ctx, std::span(batches).first(1), std::nullopt, trace);
  FinishByPolicy(OutputPolicy::kLastAnswer, trace);
  return trace;
}

absl::StatusOr<InferenceTrace> RunRandExVote(const Query& query,
                                             const EngineContext& ctx,
                                             const SelectionConfig& sel,
                                             const IterationConfig& it,
                                             std::uint64_t seed) {
  RETURN_IF_ERROR(it.Validate());
  std::vector<const Demonstration*> pool;
  pool.reserve(ctx.store.size());
  for (const Demonstration& demo : ctx.store.demonstrations()) {
    if (!sel.exclude_ids.contains(demo.id)) pool.push_back(&demo);
  }
  if (pool.empty()) {
    return absl::FailedPreconditionError("example pool is empty after exclusions");
  }
  std::mt19937_64 rng(DeriveSeed(seed, query.id));
  std::vector<Batch> batches(it.max_iterations());
  for (Batch& batch : batches) {
    std::sample(pool.begin(), pool.end(), std::back_inserter(batch),
                static_cast<std::size_t>(it.m), rng);
  }
  InferenceTrace trace = NewTrace(query, Strategy::kRandExVote);
  trace.seed = seed;
  RunBatches(query, ctx, batches, std::nullopt, trace);
  FinishByVote(trace);
  return trace;
}

absl::StatusOr<InferenceTrace> RunSimRankVote(const Query& query,
                                              const EngineContext& ctx,
                                              const SelectionConfig& sel,
                                              const IterationConfig& it) {
  RETURN_IF_ERROR(it.Validate());
  if (sel.k != it.k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "selection k (", sel.k, ") must equal iteration k (", it.k, ")"));
  }
  ASSIGN_OR_RETURN(std::vector<RankedExample> ranked,
                   SelectRelevantK(ctx.store, query, sel));
  const std::vector<Batch> batches = RankedBatches(ctx.store, ranked, it.m);
  InferenceTrace trace = NewTrace(query, Strategy::kSimRankVote);
  RunBatches(query, ctx, batches, std::nullopt, trace);
  FinishByVote(trace);
  return trace;
}

absl::StatusOr<InferenceTrace> RunZeroShot(const Query& query,
                                           const EngineContext& ctx) {
  const std::vector<Batch> batches(1);
  InferenceTrace trace = NewTrace(query, Strategy::kZeroShot);
  RunBatches(query, ctx, batches, std::nullopt, trace);
  FinishByPolicy(OutputPolicy::kLastAnswer, trace);
  return trace;
}

absl::StatusOr<InferenceTrace> RunStrategy(Strategy strategy, const Query& query,
                                           const EngineContext& ctx,
                                           const SelectionConfig& sel,
                                           const IterationConfig& it,
                                           std::uint64_t seed) {
  switch (strategy) {
    case Strategy::kZeroShot:
      return RunZeroShot(query, ctx);
    case Strategy::kVideoIcl:
      return RunVideoIcl(query, ctx, sel, it);
    case Strategy::kSimRankOnce:
      return RunSimRankOnce(query, ctx, sel, it.m);
    case Strategy::kRandExVote:
      return RunRandExVote(query, ctx, sel, it, seed);
    case Strategy::kSimRankVote:
      return RunSimRankVote(query, ctx, sel, it);
  }
  return absl::InvalidArgumentError("unknown strategy");
}

absl::StatusOr<VoteResult> MajorityVote(std::span<const VoteCandidate> candidates) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("majority vote needs at least one answer");
  }
  struct Group {
    std::size_t first = 0;
    int count = 0;
    double best_confidence = 0.0;
  };
  std::vector<Group> groups;
  absl::flat_hash_map<std::string, std::size_t> by_answer;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::string key = NormalizeAnswer(candidates[i].answer);
    auto [it, inserted] = by_answer.try_emplace(key, groups.size());
    if (inserted) {
      groups.push_back({i, 1, candidates[i].confidence});
    } else {
      Group& g = groups[it->second];
      ++g.count;
      g.best_confidence = std::max(g.best_confidence, candidates[i].confidence);
    }
  }
  // Groups are in first-seen order, so a strict comparison keeps the
  // earliest group on a full tie.
  const Group* winner = &groups.front();
  for (const Group& g : groups) {
    if (g.count > winner->count ||
        (g.count == winner->count && g.best_confidence > winner->best_confidence)) {
      winner = &g;
    }
  }
  return VoteResult{.answer = candidates[winner->first].answer,
                    .confidence = winner->best_confidence,
                    .position = winner->first};
}

}  // namespace itericl
