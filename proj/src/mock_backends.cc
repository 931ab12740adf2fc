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

#include "itericl/mock_backends.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "boost/math/special_functions/beta.hpp"
#include "itericl/seeding.h"
#include "itericl/status_macros.h"
#include "json.hpp"

namespace itericl {
namespace {

using json = nlohmann::json;

double Uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Uniform on (lo, hi].
double UniformHalfOpen(std::mt19937_64& rng, double lo, double hi) {
  return hi - Uniform01(rng) * (hi - lo);
}

}  // namespace

absl::StatusOr<MockScript> ParseMockScript(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return absl::InvalidArgumentError("mock script must be a JSON object");
  }
  MockScript script;
  for (const auto& [query_id, entries] : doc.items()) {
    if (!entries.is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat("mock script entry for \"", query_id, "\" must be an array"));
    }
    std::vector<GenerationOutput>& outputs = script[query_id];
    for (const auto& entry : entries) {
      if (!entry.is_object() || !entry.contains("answer") ||
          !entry["answer"].is_string() || !entry.contains("token_probs") ||
          !entry["token_probs"].is_array()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "mock script entry for \"", query_id,
            "\" needs \"answer\" (string) and \"token_probs\" (array)"));
      }
      GenerationOutput output;
      output.answer = entry["answer"].get<std::string>();
      for (const auto& p : entry["token_probs"]) {
        if (!p.is_number()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "mock script entry for \"", query_id,
              "\": token_probs must be numbers"));
        }
        output.token_probs.push_back(p.get<double>());
      }
      outputs.push_back(std::move(output));
    }
  }
  return script;
}

absl::StatusOr<MockScript> LoadMockScript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open mock script ", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseMockScript(buffer.str());
}

absl::StatusOr<GenerationOutput> ScriptedBackend::Generate(
    const GenerationRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = script_.find(request.query_id);
  if (it == script_.end()) {
    return BackendError(
        BackendErrorKind::kScriptExhausted,
        absl::StrCat("no scripted responses for query \"", request.query_id, "\""));
  }
  std::size_t& cursor = cursor_[request.query_id];
  if (cursor >= it->second.size()) {
    return BackendError(
        BackendErrorKind::kScriptExhausted,
        absl::StrCat("scripted responses for query \"", request.query_id,
                     "\" exhausted after ", cursor, " calls"));
  }
  GenerationOutput output = it->second[cursor++];
  output.backend_meta["backend"] = "scripted";
  return output;
}

std::size_t ScriptedBackend::consumed(std::string_view query_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cursor_.find(std::string(query_id));
  return it == cursor_.end() ? 0 : it->second;
}

ConfidenceDistribution ConfidenceDistribution::Uniform(double lo, double hi) {
  return ConfidenceDistribution(Kind::kUniform, lo, hi);
}

ConfidenceDistribution ConfidenceDistribution::Beta(double a, double b) {
  return ConfidenceDistribution(Kind::kBeta, a, b);
}

ConfidenceDistribution ConfidenceDistribution::SplitUniform(double threshold,
                                                            double p_above) {
  return ConfidenceDistribution(Kind::kSplitUniform, threshold, p_above);
}

absl::Status ConfidenceDistribution::Validate() const {
  switch (kind_) {
    case Kind::kUniform:
      if (!(first_ >= 0.0 && first_ < second_ && second_ <= 1.0)) {
        return absl::InvalidArgumentError(
            "uniform confidence needs 0 <= lo < hi <= 1");
      }
      break;
    case Kind::kBeta:
      if (!(first_ > 0.0 && second_ > 0.0 && std::isfinite(first_) &&
            std::isfinite(second_))) {
        return absl::InvalidArgumentError("beta confidence needs a, b > 0");
      }
      break;
    case Kind::kSplitUniform:
      if (!(first_ > 0.0 && first_ < 1.0 && second_ >= 0.0 && second_ <= 1.0)) {
        return absl::InvalidArgumentError(
            "split-uniform confidence needs 0 < threshold < 1 and "
            "0 <= p_above <= 1");
      }
      break;
  }
  return absl::OkStatus();
}

double ConfidenceDistribution::Sample(std::mt19937_64& rng) const {
  switch (kind_) {
    case Kind::kUniform:
      return UniformHalfOpen(rng, first_, second_);
    case Kind::kBeta: {
      const double x = std::gamma_distribution<double>(first_, 1.0)(rng);
      const double y = std::gamma_distribution<double>(second_, 1.0)(rng);
      const double v = (x + y) > 0.0 ? x / (x + y) : 0.5;
      return std::clamp(v, std::numeric_limits<double>::denorm_min(), 1.0);
    }
    case Kind::kSplitUniform: {
      const bool above = Uniform01(rng) < second_;
      return above ? UniformHalfOpen(rng, first_, 1.0)
                   : UniformHalfOpen(rng, 0.0, first_);
    }
  }
  return 1.0;
}

double ConfidenceDistribution::ProbabilityAbove(double threshold) const {
  if (threshold < 0.0) return 1.0;
  if (threshold >= 1.0) return 0.0;
  switch (kind_) {
    case Kind::kUniform: {
      const double lo = std::max(threshold, first_);
      return std::clamp((second_ - lo) / (second_ - first_), 0.0, 1.0);
    }
    case Kind::kBeta:
      return boost::math::ibetac(first_, second_, threshold);
    case Kind::kSplitUniform: {
      const double t = first_;
      const double p = second_;
      if (threshold >= t) return p * (1.0 - threshold) / (1.0 - t);
      return p + (1.0 - p) * (t - threshold) / t;
    }
  }
  return 0.0;
}

absl::Status StochasticMockParams::Validate() const {
  if (!(p_c >= 0.0 && p_c <= 1.0)) {
    return absl::InvalidArgumentError("p_c must lie in [0, 1]");
  }
  RETURN_IF_ERROR(conf_correct.Validate());
  RETURN_IF_ERROR(conf_incorrect.Validate());
  if (num_distractors < 1) {
    return absl::InvalidArgumentError("num_distractors must be >= 1");
  }
  if (tokens_per_answer < 1) {
    return absl::InvalidArgumentError("tokens_per_answer must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::unique_ptr<StochasticBackend>> StochasticBackend::Create(
    StochasticMockParams params,
    absl::flat_hash_map<std::string, std::string> gold_answers) {
  RETURN_IF_ERROR(params.Validate());
  return std::unique_ptr<StochasticBackend>(
      new StochasticBackend(std::move(params), std::move(gold_answers)));
}

absl::StatusOr<GenerationOutput> StochasticBackend::Generate(
    const GenerationRequest& request) {
  auto gold = golds_.find(request.query_id);
  if (gold == golds_.end()) {
    return absl::NotFoundError(absl::StrCat(
        "stochastic mock has no gold answer for query \"", request.query_id, "\""));
  }
  std::lock_guard<std::mutex> lock(mu_);
  QueryState& state = state_[request.query_id];
  const std::uint64_t call = state.calls++;

  if (request.purpose == RequestPurpose::kConfidenceProbe) {
    const bool confident = state.last_confidence > params_.probe_threshold;
    return GenerationOutput{.answer = confident ? "Yes" : "No",
                            .token_probs = {1.0},
                            .backend_meta = {{"backend", "stochastic"}}};
  }

  std::mt19937_64 rng(
      DeriveSeed(DeriveSeed(params_.seed, request.query_id), call));
  const bool correct = Uniform01(rng) < params_.p_c;
  const double confidence = correct ? params_.conf_correct.Sample(rng)
                                    : params_.conf_incorrect.Sample(rng);
  state.last_confidence = confidence;

  GenerationOutput output;
  if (correct) {
    output.answer = gold->second;
  } else {
    const int distractor = std::uniform_int_distribution<int>(
        1, params_.num_distractors)(rng);
    output.answer = absl::StrCat("wrong-", distractor);
  }
  const int tokens = params_.tokens_per_answer;
  const int min_position = std::uniform_int_distribution<int>(0, tokens - 1)(rng);
  output.token_probs.reserve(tokens);
  for (int i = 0; i < tokens; ++i) {
    output.token_probs.push_back(
        i == min_position ? confidence
                          : UniformHalfOpen(rng, confidence, 1.0));
  }
  output.backend_meta["backend"] = "stochastic";
  output.backend_meta["correct"] = correct ? "true" : "false";
  return output;
}

}  // namespace itericl
