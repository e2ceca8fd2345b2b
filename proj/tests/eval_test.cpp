// Copyright 2026 The tstkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <gtest/gtest.h>

#include <sstream>

#include "support/bleu_oracle.hpp"
#include "tstkit/eval.hpp"
#include "tstkit/toy_lm.hpp"

namespace {

TEST(Bleu, IdentityDisjointAndEmpty) {
  EXPECT_DOUBLE_EQ(tstkit::bleu("the cat sat on the mat .", {"the cat sat on the mat ."}), 100.0);
  EXPECT_NEAR(tstkit::bleu("completely unrelated words", {"the quick brown fox"}), 0.0, 0.5);
  EXPECT_EQ(tstkit::bleu("", {"a b"}), 0.0);
  EXPECT_EQ(tstkit::bleu("  ", {"a b"}), 0.0);
  EXPECT_THROW(tstkit::bleu("a", {}), tstkit::ArgumentError);
}

TEST(Bleu, MatchesFrozenAndSecondImplementation) {
  // Frozen by tests/oracles/freeze_values.py, one per fixture.
  const double frozen[] = {71.65313105737893, 100.0, 48.8923022434901, 33.27714551776236,
                           57.89300674674097, 3.9281465090051313, 13.155831089736145,
                           35.93041119630843, 4.279677428117006, 43.167001068522524, 0.0, 100.0,
                           19.180183554164504, 24.384183193426086, 8.034284189446518, 50.0,
                           78.5629301801026, 11.856311014966876, 27.4941620352113,
                           18.651176671349297};
  const auto cases = oracle::bleu_cases();
  ASSERT_EQ(cases.size(), 20u);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double got = tstkit::bleu(cases[i].candidate, cases[i].references);
    EXPECT_NEAR(got, frozen[i], 1e-6) << cases[i].candidate;
    EXPECT_NEAR(got, oracle::sentence_bleu(cases[i].candidate, cases[i].references), 1e-6);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 100.0);
  }
}

TEST(Bleu, ReferenceOrderAndTrailingWhitespace) {
  for (const auto& c : oracle::bleu_cases()) {
    auto rev = c.references;
    std::reverse(rev.begin(), rev.end());
    EXPECT_DOUBLE_EQ(tstkit::bleu(c.candidate, c.references), tstkit::bleu(c.candidate, rev));
    EXPECT_DOUBLE_EQ(tstkit::bleu(c.candidate + "  \n", c.references),
                     tstkit::bleu(c.candidate, c.references));
  }
}

TEST(CorpusBleu, ThreeItemFixture) {
  const std::vector<std::string> outs = {"the cat sat on the mat .", "a dog barked loudly",
                                         "i love this place !"};
  const std::vector<std::string> srcs = {"the cat is on the mat .", "the dog barked",
                                         "i hate this place !"};
  const std::vector<std::string> refs = {"a cat sat on a mat .", "a dog barked very loudly",
                                         "i really love this place !"};
  const auto p = tstkit::corpus_bleu_pair(outs, srcs, refs);
  EXPECT_NEAR(p.s_sbleu, 36.27102189021622, 1e-6);
  EXPECT_NEAR(p.r_sbleu, 36.960883978481085, 1e-6);
  EXPECT_NEAR(p.s_sbleu, oracle::corpus_bleu(outs, srcs), 1e-9);
  EXPECT_NEAR(p.r_sbleu, oracle::corpus_bleu(outs, refs), 1e-9);
}

TEST(CorpusBleu, ForcedCases) {
  const std::vector<std::string> a = {"one fine day", "the end is near"};
  const auto same = tstkit::corpus_bleu_pair(a, a, a);
  EXPECT_EQ(same.s_sbleu, 100.0);
  EXPECT_EQ(same.r_sbleu, 100.0);
  const auto split = tstkit::corpus_bleu_pair(a, a, {"xx yy", "zz qq ww"});
  EXPECT_EQ(split.s_sbleu, 100.0);
  EXPECT_NEAR(split.r_sbleu, 0.0, 0.5);
  EXPECT_THROW(tstkit::corpus_bleu(a, {"x"}), tstkit::ArgumentError);
}

tstkit::ToyBigramProvider uniform7() {
  std::vector<std::string> v = {"a", "b", "c", "d", "e", "f", "g"};
  std::map<std::string, std::vector<double>> rows;
  for (const auto& t : v) rows[t] = std::vector<double>(7, 1.0 / 7.0);
  return {v, std::vector<double>(7, 1.0 / 7.0), rows};
}

TEST(Perplexity, UniformPointMassAndBigram) {
  const auto uni = uniform7();
  for (const char* s : {"a", "g f e", "a a a a a b c d"}) {
    EXPECT_NEAR(tstkit::perplexity(uni, s), 7.0, 1e-9);
  }

  const tstkit::ToyBigramProvider chain({"x", "y", "z"}, {1, 0, 0},
                                        {{"x", {0, 1, 0}}, {"y", {0, 0, 1}}, {"z", {1, 0, 0}}});
  EXPECT_NEAR(tstkit::perplexity(chain, "x y z x"), 1.0, 1e-12);

  const tstkit::ToyBigramProvider bi({"a", "b", "c", "</s>"}, {0.5, 0.25, 0.25, 0},
                                     {{"a", {0, 0.6, 0.4, 0}},
                                      {"b", {0, 0, 0.7, 0.3}},
                                      {"c", {0.2, 0, 0, 0.8}},
                                      {"</s>", {0.25, 0.25, 0.25, 0.25}}});
  // Frozen by tests/oracles/freeze_values.py.
  EXPECT_NEAR(tstkit::perplexity(bi, "a b c </s>"), 1.5619699684601278, 1e-12);
  EXPECT_NEAR(tstkit::perplexity(bi, "a b c </s>"), std::pow(0.5 * 0.6 * 0.7 * 0.8, -0.25), 1e-12);
}

TEST(Perplexity, ProductFormOnShortSequences) {
  const tstkit::ToyBigramProvider bi({"a", "b"}, {0.3, 0.7},
                                     {{"a", {0.9, 0.1}}, {"b", {0.4, 0.6}}});
  const std::vector<std::string> seqs = {"a", "b a", "a a b", "b b b a", "a b a b a", "b a a a b b"};
  for (const auto& s : seqs) {
    const auto toks = tstkit::text::split_whitespace(s);
    double prob = toks[0] == "a" ? 0.3 : 0.7;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const bool from_a = toks[i - 1] == "a", to_a = toks[i] == "a";
      prob *= from_a ? (to_a ? 0.9 : 0.1) : (to_a ? 0.4 : 0.6);
    }
    EXPECT_NEAR(tstkit::perplexity(bi, s), std::pow(prob, -1.0 / toks.size()), 1e-12) << s;
  }
}

TEST(Perplexity, Errors) {
  const auto uni = uniform7();
  try {
    tstkit::perplexity(uni, "a zebra");
    FAIL();
  } catch (const tstkit::ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos);
  }
  EXPECT_THROW(tstkit::perplexity(uni, " "), tstkit::ArgumentError);
}

tstkit::LexiconClassifier lexicon() {
  std::istringstream in("positive: great good lovely Delicious\nnegative: awful bad rude\n\n");
  return tstkit::LexiconClassifier::parse(in);
}

TEST(Lexicon, HandLabelledFixtures) {
  const auto lex = lexicon();
  // positive (2 vs 0), positive (1 vs 0), tie 1-1 -> unknown, positive (2 vs 1).
  const std::vector<std::string> outs = {"Great food, lovely staff", "delicious!",
                                         "good food but rude waiter", "good and great, not bad"};
  EXPECT_EQ(lex.classify(outs[0]).label, "positive");
  EXPECT_DOUBLE_EQ(lex.classify(outs[3]).score, 2.0 / 3.0);
  EXPECT_EQ(lex.classify(outs[2]).label, "unknown");
  EXPECT_EQ(lex.classify("nothing here").label, "unknown");
  EXPECT_DOUBLE_EQ(tstkit::style_accuracy(lex, outs, "positive"), 0.75);
  EXPECT_DOUBLE_EQ(tstkit::style_accuracy(lex, {"great", "good"}, "positive"), 1.0);
  EXPECT_DOUBLE_EQ(tstkit::style_accuracy(lex, {"great", "good"}, "negative"), 0.0);
  EXPECT_THROW(tstkit::style_accuracy(lex, {}, "positive"), tstkit::ArgumentError);
}

TEST(Lexicon, ParseErrorsCarryLine) {
  std::istringstream bad("positive: good\nno colon here\n");
  try {
    tstkit::LexiconClassifier::parse(bad);
    FAIL();
  } catch (const tstkit::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream empty("\n\n");
  EXPECT_THROW(tstkit::LexiconClassifier::parse(empty), tstkit::ParseError);
}

class Throwing final : public tstkit::StyleClassifier {
 public:
  tstkit::Classification classify(const std::string& s) const override {
    if (s == "boom") throw tstkit::TransportError("classifier down");
    return {"positive", 1.0};
  }
};

TEST(StyleAccuracy, FailureCountsAsMiss) {
  EXPECT_DOUBLE_EQ(tstkit::style_accuracy(Throwing{}, {"ok", "boom", "ok", "ok"}, "positive"), 0.75);
}

TEST(Report, Json) {
  tstkit::EvalReport r{0.5, std::nullopt, 12.5, 3.25, 4};
  auto j = tstkit::to_json(r);
  EXPECT_FALSE(j.contains("r_sbleu"));
  EXPECT_EQ(j["n_items"], 4);
  r.r_sbleu = 40.0;
  EXPECT_EQ(tstkit::to_json(r)["r_sbleu"], 40.0);
}

}  // namespace
