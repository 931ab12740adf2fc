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

#include "itericl/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "itericl/status_macros.h"
#include "json.hpp"

namespace itericl {
namespace {

using json = nlohmann::json;
using NgramCounts = absl::flat_hash_map<std::string, int>;

NgramCounts CountNgrams(std::span<const std::string> tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[absl::StrJoin(tokens.subspan(i, n), "\x1f")];
  }
  return counts;
}

// Clipped matches and candidate n-gram totals per order for one pair.
struct PairStats {
  std::vector<int64_t> matches;
  std::vector<int64_t> totals;
  int64_t cand_len = 0;
  int64_t ref_len = 0;
};

PairStats ComputePairStats(std::span<const std::string> cand,
                           std::span<const std::vector<std::string>> refs,
                           int max_n) {
  PairStats stats;
  stats.matches.assign(max_n, 0);
  stats.totals.assign(max_n, 0);
  stats.cand_len = static_cast<int64_t>(cand.size());
  // Closest reference length; ties go to the shorter one.
  int64_t best_diff = -1;
  for (const auto& ref : refs) {
    const int64_t len = static_cast<int64_t>(ref.size());
    const int64_t diff = std::abs(len - stats.cand_len);
    if (best_diff < 0 || diff < best_diff || (diff == best_diff && len < stats.ref_len)) {
      best_diff = diff;
      stats.ref_len = len;
    }
  }
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts cand_counts = CountNgrams(cand, n);
    NgramCounts max_ref;
    for (const auto& ref : refs) {
      for (const auto& [gram, count] : CountNgrams(ref, n)) {
        int& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    for (const auto& [gram, count] : cand_counts) {
      stats.totals[n - 1] += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) stats.matches[n - 1] += std::min(count, it->second);
    }
  }
  return stats;
}

double BrevityPenalty(int64_t cand_len, int64_t ref_len) {
  if (cand_len == 0) return 0.0;
  if (cand_len > ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

// BLEU-1..max_n from aggregated statistics.
std::vector<double> BleuFromStats(const PairStats& s, int max_n,
                                  BleuSmoothing smoothing) {
  const double bp = BrevityPenalty(s.cand_len, s.ref_len);
  std::vector<double> scores(max_n, 0.0);
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= max_n; ++n) {
    double num = static_cast<double>(s.matches[n - 1]);
    double den = static_cast<double>(s.totals[n - 1]);
    if (smoothing == BleuSmoothing::kAddOne && n > 1) {
      num += 1.0;
      den += 1.0;
    }
    if (num == 0.0 || den == 0.0) zero = true;
    if (!zero) log_sum += std::log(num / den);
    scores[n - 1] = zero ? 0.0 : bp * std::exp(log_sum / n);
  }
  return scores;
}

std::vector<std::vector<std::string>> TokenizeAll(std::span<const std::string> texts) {
  std::vector<std::vector<std::string>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Tokenize(t));
  return out;
}

absl::Status CheckAligned(std::size_t candidates, std::size_t references) {
  if (candidates != references) {
    return absl::InvalidArgumentError(absl::StrCat(
        "candidate/reference count mismatch: ", candidates, " vs ", references));
  }
  return absl::OkStatus();
}

// Gold references for each trace, in trace order.
absl::StatusOr<std::vector<std::vector<std::string>>> GoldsFor(
    std::span<const InferenceTrace> traces, const GoldMap& golds) {
  std::vector<std::vector<std::string>> refs;
  std::vector<std::string> missing;
  for (const InferenceTrace& t : traces) {
    auto it = golds.find(t.query_id);
    if (it == golds.end() || it->second.empty()) {
      missing.push_back(t.query_id);
    } else {
      refs.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("missing gold answers for: ", absl::StrJoin(missing, ", ")));
  }
  return refs;
}

}  // namespace

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kMultipleChoice:
      return "multiple_choice";
    case TaskKind::kOpenEnded:
      return "open_ended";
    case TaskKind::kClassification:
      return "classification";
    case TaskKind::kCaptioning:
      return "captioning";
  }
  return "unknown";
}

absl::StatusOr<TaskKind> ParseTaskKind(std::string_view name) {
  for (TaskKind k : {TaskKind::kMultipleChoice, TaskKind::kOpenEnded,
                     TaskKind::kClassification, TaskKind::kCaptioning}) {
    if (TaskKindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown task \"", std::string(name), "\""));
}

EvalTask EvalTask::For(TaskKind kind) {
  return EvalTask{
      .kind = kind,
      .normalization = {.extract_option_letter = kind == TaskKind::kMultipleChoice}};
}

absl::StatusOr<GoldMap> LoadGolds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  GoldMap golds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") ||
        !obj["id"].is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path.string(), ": line ", line_no, ": expected an object with \"id\""));
    }
    auto gold = obj.find("gold_answer");
    if (gold == obj.end() || gold->is_null()) continue;
    std::vector<std::string> refs;
    if (gold->is_string()) {
      refs.push_back(gold->get<std::string>());
    } else if (gold->is_array()) {
      for (const json& r : *gold) {
        if (!r.is_string()) {
          return absl::InvalidArgumentError(absl::StrCat(
              path.string(), ": line ", line_no, ": gold_answer entries must be strings"));
        }
        refs.push_back(r.get<std::string>());
      }
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          path.string(), ": line ", line_no, ": gold_answer must be a string or array"));
    }
    golds[obj["id"].get<std::string>()] = std::move(refs);
  }
  return golds;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

absl::StatusOr<BleuScores> Bleu(std::span<const std::string> candidates,
                                std::span<const std::vector<std::string>> references,
                                const BleuOptions& options) {
  if (options.max_n < 1 || options.max_n > 4) {
    return absl::InvalidArgumentError("BLEU max_n must lie in [1, 4]");
  }
  RETURN_IF_ERROR(CheckAligned(candidates.size(), references.size()));
  if (candidates.empty()) return absl::InvalidArgumentError("BLEU needs at least one pair");
  const int max_n = options.max_n;
  PairStats corpus;
  corpus.matches.assign(max_n, 0);
  corpus.totals.assign(max_n, 0);
  BleuScores scores;
  scores.per_sentence.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty()) {
      return absl::InvalidArgumentError(absl::StrCat("pair ", i, " has no references"));
    }
    const std::vector<std::string> cand = Tokenize(candidates[i]);
    const auto refs = TokenizeAll(references[i]);
    const PairStats s = ComputePairStats(cand, refs, max_n);
    for (int n = 0; n < max_n; ++n) {
      corpus.matches[n] += s.matches[n];
      corpus.totals[n] += s.totals[n];
    }
    corpus.cand_len += s.cand_len;
    corpus.ref_len += s.ref_len;
    scores.per_sentence.push_back(BleuFromStats(s, max_n, options.smoothing));
  }
  scores.corpus = BleuFromStats(corpus, max_n, options.smoothing);
  scores.brevity_penalty = BrevityPenalty(corpus.cand_len, corpus.ref_len);
  return scores;
}

std::size_t LongestCommonSubsequence(std::span<const std::string> a,
                                     std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

absl::StatusOr<RougeLScores> RougeL(
    std::span<const std::string> candidates,
    std::span<const std::vector<std::string>> references) {
  RETURN_IF_ERROR(CheckAligned(candidates.size(), references.size()));
  RougeLScores scores;
  scores.per_pair.reserve(candidates.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::vector<std::string> cand = Tokenize(candidates[i]);
    double best = 0.0;
    for (const std::string& ref_text : references[i]) {
      const std::vector<std::string> ref = Tokenize(ref_text);
      if (cand.empty() || ref.empty()) continue;
      const double lcs = static_cast<double>(LongestCommonSubsequence(cand, ref));
      if (lcs == 0.0) continue;
      const double p = lcs / static_cast<double>(cand.size());
      const double r = lcs / static_cast<double>(ref.size());
      best = std::max(best, 2.0 * p * r / (p + r));
    }
    scores.per_pair.push_back(best);
    sum += best;
  }
  scores.corpus = candidates.empty() ? 0.0 : sum / static_cast<double>(candidates.size());
  return scores;
}

absl::StatusOr<MetricReport> ExactMatchAccuracy(
    std::span<const InferenceTrace> traces, const GoldMap& golds,
    const EvalTask& task) {
  ASSIGN_OR_RETURN(auto refs, GoldsFor(traces, golds));
  MetricReport report;
  report.sample_count = traces.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string answer = NormalizeAnswer(traces[i].final_answer, task.normalization);
    const bool match = std::any_of(refs[i].begin(), refs[i].end(), [&](const std::string& g) {
      return NormalizeAnswer(g, task.normalization) == answer;
    });
    if (match) ++correct;
    report.per_item.push_back({traces[i].query_id, {{"exact_match", match ? 1.0 : 0.0}}});
  }
  report.metrics["accuracy"] =
      traces.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(traces.size());
  return report;
}

absl::StatusOr<MetricReport> CaptionMetrics(std::span<const InferenceTrace> traces,
                                            const GoldMap& golds,
                                            const BleuOptions& options) {
  ASSIGN_OR_RETURN(auto refs, GoldsFor(traces, golds));
  std::vector<std::string> candidates;
  candidates.reserve(traces.size());
  for (const InferenceTrace& t : traces) candidates.push_back(t.final_answer);
  ASSIGN_OR_RETURN(BleuScores bleu, Bleu(candidates, refs, options));
  ASSIGN_OR_RETURN(RougeLScores rouge, RougeL(candidates, refs));
  MetricReport report;
  report.sample_count = traces.size();
  for (int n = 1; n <= options.max_n; ++n) {
    report.metrics[absl::StrCat("bleu_", n)] = bleu.corpus[n - 1];
  }
  report.metrics["rouge_l"] = rouge.corpus;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    ItemScore item{.query_id = traces[i].query_id};
    for (int n = 1; n <= options.max_n; ++n) {
      item.scores[absl::StrCat("bleu_", n)] = bleu.per_sentence[i][n - 1];
    }
    item.scores["rouge_l"] = rouge.per_pair[i];
    report.per_item.push_back(std::move(item));
  }
  return report;
}

absl::StatusOr<MetricReport> Evaluate(std::span<const InferenceTrace> traces,
                                      const GoldMap& golds, const EvalTask& task) {
  if (task.kind == TaskKind::kCaptioning) return CaptionMetrics(traces, golds);
  return ExactMatchAccuracy(traces, golds, task);
}

}  // namespace itericl
