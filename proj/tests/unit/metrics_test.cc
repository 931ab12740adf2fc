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


#include <fstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "itericl/answer_normalization.h"
#include "itericl/inference_engine.h"
#include "itericl/metrics.h"
#include "json.hpp"

namespace itericl {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

InferenceTrace Answered(std::string id, std::string answer) {
  InferenceTrace t{.query_id = std::move(id), .strategy = "videoicl"};
  t.final_answer = std::move(answer);
  return t;
}

TEST(NormalizationTest, Rules) {
  EXPECT_EQ(NormalizeAnswer("  Hello   World. "), "hello world");
  EXPECT_EQ(NormalizeAnswer("Yes!"), "yes");
  EXPECT_EQ(NormalizeAnswer("(B) a cat"), "b");
  EXPECT_EQ(NormalizeAnswer("(B) a cat", {.extract_option_letter = false}), "(b) a cat");
  EXPECT_EQ(ExtractOptionLetter("The answer is (C)."), 'c');
  EXPECT_FALSE(ExtractOptionLetter("no letter").has_value());
}

TEST(TokenizeTest, PunctuationSplitAndLowercase) {
  EXPECT_THAT(Tokenize("A man, walking."), ElementsAre("a", "man", ",", "walking", "."));
  EXPECT_THAT(Tokenize("  "), ElementsAre());
}

TEST(BleuTest, ClippedUnigram) {
  std::vector<std::string> cands = {"the the the"};
  std::vector<std::vector<std::string>> refs = {{"the cat"}};
  auto bleu = Bleu(cands, refs);
  ASSERT_TRUE(bleu.ok());
  EXPECT_NEAR(bleu->corpus[0], 1.0 / 3.0, 1e-12);
  EXPECT_EQ(bleu->brevity_penalty, 1.0);
  EXPECT_EQ(bleu->corpus[1], 0.0);
}

TEST(BleuTest, IdentityIsOne) {
  std::vector<std::string> cands = {"a man rides a horse on the beach"};
  std::vector<std::vector<std::string>> refs = {{"a man rides a horse on the beach"}};
  auto bleu = Bleu(cands, refs);
  ASSERT_TRUE(bleu.ok());
  EXPECT_THAT(bleu->corpus, ElementsAre(1.0, 1.0, 1.0, 1.0));
}

TEST(BleuTest, BrevityPenalty) {
  std::vector<std::string> cands = {"a b"};
  std::vector<std::vector<std::string>> refs = {{"a b c d"}};
  auto bleu = Bleu(cands, refs, {.max_n = 1});
  ASSERT_TRUE(bleu.ok());
  EXPECT_NEAR(bleu->brevity_penalty, std::exp(1.0 - 4.0 / 2.0), 1e-15);
  EXPECT_NEAR(bleu->corpus[0], std::exp(-1.0), 1e-15);
}

TEST(BleuTest, NoFourGramOverlapIsZero) {
  std::vector<std::string> cands = {"a b c x d e f"};
  std::vector<std::vector<std::string>> refs = {{"a b c y d e f"}};
  auto bleu = Bleu(cands, refs);
  ASSERT_TRUE(bleu.ok());
  EXPECT_GT(bleu->corpus[2], 0.0);
  EXPECT_EQ(bleu->corpus[3], 0.0);
  auto smoothed = Bleu(cands, refs, {.smoothing = BleuSmoothing::kAddOne});
  EXPECT_GT(smoothed->corpus[3], 0.0);
}

TEST(BleuTest, ClosestReferenceLengthTiesShorter) {
  std::vector<std::string> cands = {"a b c"};
  std::vector<std::vector<std::string>> refs = {{"a b c d", "a b"}};
  auto bleu = Bleu(cands, refs, {.max_n = 1});
  EXPECT_EQ(bleu->brevity_penalty, 1.0);
}

TEST(BleuTest, Errors) {
  std::vector<std::string> cands = {"a"};
  std::vector<std::vector<std::string>> empty_refs = {{}};
  EXPECT_FALSE(Bleu(cands, empty_refs).ok());
  std::vector<std::vector<std::string>> two = {{"a"}, {"b"}};
  EXPECT_FALSE(Bleu(cands, two).ok());
  std::vector<std::vector<std::string>> one = {{"a"}};
  EXPECT_FALSE(Bleu(cands, one, {.max_n = 5}).ok());
}

TEST(RougeLTest, Examples) {
  std::vector<std::string> a = {"a", "b", "c", "d"};
  std::vector<std::string> b = {"a", "c", "b", "d"};
  EXPECT_EQ(LongestCommonSubsequence(a, b), 3u);
  std::vector<std::string> cands = {"a b c d", "same text here", "x y", ""};
  std::vector<std::vector<std::string>> refs = {{"a c b d"}, {"same text here"}, {"p q"}, {"p"}};
  auto rouge = RougeL(cands, refs);
  ASSERT_TRUE(rouge.ok());
  EXPECT_THAT(rouge->per_pair, ElementsAre(0.75, 1.0, 0.0, 0.0));
  EXPECT_NEAR(rouge->corpus, 1.75 / 4, 1e-15);
}

TEST(RougeLTest, MultiReferenceTakesMax) {
  std::vector<std::string> cands = {"a b c d"};
  std::vector<std::vector<std::string>> refs = {{"z", "a b c d"}};
  EXPECT_EQ(RougeL(cands, refs)->per_pair[0], 1.0);
}

class FixtureTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ifstream in(std::string(ITERICL_TEST_DATA_DIR) + "/metric_fixture.json");
    ASSERT_TRUE(in);
    fixture_ = nlohmann::json::parse(in);
    for (const auto& pair : fixture_["pairs"]) {
      cands_.push_back(pair["candidate"]);
      refs_.push_back(pair["references"].get<std::vector<std::string>>());
    }
  }
  nlohmann::json fixture_;
  std::vector<std::string> cands_;
  std::vector<std::vector<std::string>> refs_;
};

TEST_F(FixtureTest, BleuMatchesReference) {
  ASSERT_EQ(cands_.size(), 20u);
  auto bleu = Bleu(cands_, refs_);
  ASSERT_TRUE(bleu.ok());
  for (int n = 0; n < 4; ++n) {
    EXPECT_NEAR(bleu->corpus[n], fixture_["corpus_bleu"][n].get<double>(), 1e-6) << "BLEU-" << n + 1;
  }
  for (std::size_t i = 0; i < cands_.size(); ++i) {
    for (int n = 0; n < 4; ++n) {
      EXPECT_NEAR(bleu->per_sentence[i][n], fixture_["sentence_bleu"][i][n].get<double>(), 1e-6)
          << "pair " << i << " BLEU-" << n + 1;
    }
  }
}

TEST_F(FixtureTest, RougeLMatchesReference) {
  auto rouge = RougeL(cands_, refs_);
  ASSERT_TRUE(rouge.ok());
  EXPECT_NEAR(rouge->corpus, fixture_["corpus_rouge_l"].get<double>(), 1e-6);
  for (std::size_t i = 0; i < cands_.size(); ++i) {
    EXPECT_NEAR(rouge->per_pair[i], fixture_["rouge_l"][i].get<double>(), 1e-6) << "pair " << i;
  }
}

TEST(ExactMatchTest, Examples) {
  GoldMap golds = {{"q1", {"B"}}, {"q2", {"Assault"}}, {"q3", {"yes"}}, {"q4", {"no"}}};
  std::vector<InferenceTrace> letter = {Answered("q1", "(B)")};
  auto r = ExactMatchAccuracy(letter, golds, EvalTask::For(TaskKind::kMultipleChoice));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->metrics.at("accuracy"), 1.0);

  std::vector<InferenceTrace> wrong = {Answered("q2", "abuse")};
  EXPECT_EQ(ExactMatchAccuracy(wrong, golds, EvalTask::For(TaskKind::kClassification))
                ->metrics.at("accuracy"),
            0.0);

  std::vector<InferenceTrace> half = {Answered("q1", "B"), Answered("q2", "assault."),
                                      Answered("q3", "no"), Answered("q4", "yes")};
  auto h = ExactMatchAccuracy(half, golds, EvalTask::For(TaskKind::kOpenEnded));
  EXPECT_EQ(h->metrics.at("accuracy"), 0.5);
  EXPECT_EQ(h->sample_count, 4u);
  ASSERT_EQ(h->per_item.size(), 4u);
  EXPECT_EQ(h->per_item[2].scores.at("exact_match"), 0.0);
}

TEST(ExactMatchTest, MissingGoldListsIds) {
  GoldMap golds = {{"q1", {"B"}}};
  std::vector<InferenceTrace> traces = {Answered("q1", "B"), Answered("q7", "A"), Answered("q9", "A")};
  auto r = ExactMatchAccuracy(traces, golds, EvalTask::For(TaskKind::kMultipleChoice));
  ASSERT_FALSE(r.ok());
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("q7"));
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("q9"));
}

TEST(EvaluateTest, CaptioningUsesOverlapMetrics) {
  GoldMap golds = {{"c1", {"a boat sails across the lake"}},
                   {"c2", {"smoke rises from a factory chimney"}}};
  std::vector<InferenceTrace> traces = {Answered("c1", "a boat sails across the lake"),
                                        Answered("c2", "smoke rises from a factory chimney")};
  auto r = Evaluate(traces, golds, EvalTask::For(TaskKind::kCaptioning));
  ASSERT_TRUE(r.ok());
  for (const char* m : {"bleu_1", "bleu_2", "bleu_3", "bleu_4", "rouge_l"}) {
    EXPECT_EQ(r->metrics.at(m), 1.0) << m;
  }
  EXPECT_FALSE(r->metrics.contains("accuracy"));
  EXPECT_EQ(r->sample_count, 2u);
  auto mc = Evaluate(traces, golds, EvalTask::For(TaskKind::kMultipleChoice));
  EXPECT_TRUE(mc->metrics.contains("accuracy"));
  EXPECT_FALSE(mc->metrics.contains("bleu_1"));
}

TEST(TaskKindTest, Parse) {
  for (auto k : {TaskKind::kMultipleChoice, TaskKind::kOpenEnded, TaskKind::kClassification,
                 TaskKind::kCaptioning}) {
    EXPECT_EQ(*ParseTaskKind(TaskKindName(k)), k);
  }
  EXPECT_FALSE(ParseTaskKind("summarization").ok());
  EXPECT_TRUE(EvalTask::For(TaskKind::kMultipleChoice).normalization.extract_option_letter);
  EXPECT_FALSE(EvalTask::For(TaskKind::kOpenEnded).normalization.extract_option_letter);
}

}  // namespace
}  // namespace itericl
