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


#ifndef ITERICL_TESTS_COMMON_ORACLES_H_
#define ITERICL_TESTS_COMMON_ORACLES_H_

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "itericl/example_store.h"

namespace itericl::testing {

inline std::vector<double> Gaussian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = g(rng);
  return v;
}

// Random pool of `n` demonstrations. About one in ten entries copies an
// earlier entry's embeddings so that score ties occur.
inline std::vector<Demonstration> RandomDemos(std::mt19937_64& rng, std::size_t n,
                                              int dim) {
  std::vector<Demonstration> demos;
  demos.reserve(n);
  std::uniform_int_distribution<int> coin(0, 9);
  for (std::size_t i = 0; i < n; ++i) {
    Demonstration d{.id = "d" + std::to_string(i),
                    .question = "question " + std::to_string(i),
                    .answer = "answer " + std::to_string(i),
                    .video_ref = "v" + std::to_string(i) + ".mp4",
                    .text_embedding = *EmbeddingVector::Create(Gaussian(rng, dim)),
                    .video_embedding = *EmbeddingVector::Create(Gaussian(rng, dim))};
    if (i > 0 && coin(rng) == 0) {
      const Demonstration& src =
          demos[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)];
      d.text_embedding = src.text_embedding;
      d.video_embedding = src.video_embedding;
    }
    demos.push_back(std::move(d));
  }
  return demos;
}

inline Query RandomQuery(std::mt19937_64& rng, int dim, std::string id = "q") {
  Query q;
  q.id = std::move(id);
  q.question = "query";
  q.video_ref = "query.mp4";
  q.text_embedding = *EmbeddingVector::Create(Gaussian(rng, dim));
  q.video_embedding = *EmbeddingVector::Create(Gaussian(rng, dim));
  return q;
}

struct OracleEntry {
  std::string id;
  double score = 0.0;
};

// Scores every demonstration, stable-sorts by descending score and keeps the
// first k.
inline std::vector<OracleEntry> OracleTopK(const ExampleStore& store, const Query& query,
                                           const SelectionConfig& cfg) {
  std::vector<OracleEntry> all;
  for (const Demonstration& d : store.demonstrations()) {
    if (cfg.exclude_ids.contains(d.id)) continue;
    all.push_back({d.id, *CombinedSimilarity(query, d, cfg.alpha)});
  }
  std::stable_sort(all.begin(), all.end(), [](const OracleEntry& a, const OracleEntry& b) {
    return a.score > b.score;
  });
  if (all.size() > static_cast<std::size_t>(cfg.k)) all.resize(cfg.k);
  return all;
}

inline bool MatchesOracle(const std::vector<RankedExample>& got,
                          const std::vector<OracleEntry>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].demonstration_id != want[i].id || got[i].score != want[i].score ||
        got[i].rank != static_cast<int>(i) + 1) {
      return false;
    }
  }
  return true;
}

}  // namespace itericl::testing

#endif  // ITERICL_TESTS_COMMON_ORACLES_H_
